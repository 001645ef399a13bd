//! Volterra transforms `u - int_x^L k(x, y) u(y) dy` and their inverses on the
//! kernel grid.

use super::table::{KernelKind, KernelTable};
use crate::error::{Error, Result};

/// `int_{x_i}^L K(x_i, y) u(y) dy` by the trapezoid rule with Gregory end
/// corrections through second differences (fourth order for smooth data).
/// Tails of one panel use the plain trapezoid rule.
fn tail_integral(table: &KernelTable, u: &[f64], i: usize) -> f64 {
    let m = table.grid.subdivisions();
    let h = table.grid.spacing();
    let f: Vec<f64> = (i..=m).map(|j| table.value(i, j) * u[j]).collect();
    let n = f.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let trap = h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[n]));
    if n < 2 {
        return trap;
    }
    let d1 = (f[n] - f[n - 1]) - (f[1] - f[0]);
    let d2 = (f[n] - 2.0 * f[n - 1] + f[n - 2]) + (f[2] - 2.0 * f[1] + f[0]);
    trap - h / 12.0 * d1 - h / 24.0 * d2
}

fn check(table: &KernelTable, want: KernelKind, u: &[f64]) -> Result<()> {
    if table.kind != want {
        return Err(Error::Usage(format!("expected a {want} table, got {}", table.kind)));
    }
    if u.len() != table.grid.subdivisions() + 1 {
        return Err(Error::Usage(format!(
            "profile has {} samples, kernel grid has {}",
            u.len(),
            table.grid.subdivisions() + 1
        )));
    }
    Ok(())
}

/// `w(x) = u(x) - int_x^L k(x, y) u(y) dy`.
pub fn forward_transform(k: &KernelTable, u: &[f64]) -> Result<Vec<f64>> {
    check(k, KernelKind::ControllerK, u)?;
    Ok((0..u.len()).map(|i| u[i] - tail_integral(k, u, i)).collect())
}

/// `u(x) = w(x) + int_x^L l(x, y) w(y) dy`.
pub fn inverse_transform(l: &KernelTable, w: &[f64]) -> Result<Vec<f64>> {
    check(l, KernelKind::InverseL, w)?;
    Ok((0..w.len()).map(|i| w[i] + tail_integral(l, w, i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{solve_kernel, TriangleGrid};

    #[test]
    fn zero_kernel_is_the_identity() {
        let g = TriangleGrid::new(3.0, 9).unwrap();
        let k = solve_kernel(KernelKind::ControllerK, 0.0, &g).unwrap();
        let l = solve_kernel(KernelKind::InverseL, 0.0, &g).unwrap();
        let u: Vec<f64> = (0..10).map(|i| (i as f64).cos()).collect();
        assert_eq!(forward_transform(&k, &u).unwrap(), u);
        assert_eq!(inverse_transform(&l, &u).unwrap(), u);
    }

    #[test]
    fn quadrature_is_exact_on_cubics() {
        let g = TriangleGrid::new(2.0, 10).unwrap();
        let mut k = solve_kernel(KernelKind::ControllerK, 0.0, &g).unwrap();
        k.values.iter_mut().for_each(|v| *v = -1.0);
        let u: Vec<f64> = (0..=10).map(|i| g.coord(i).powi(3) - g.coord(i)).collect();
        let w = forward_transform(&k, &u).unwrap();
        // w = u + int_x^2 (y^3 - y) dy, exact except on the last one-panel tail
        for i in 0..9 {
            let x = g.coord(i);
            let exact = (16.0 - x.powi(4)) / 4.0 - (4.0 - x * x) / 2.0;
            assert!((w[i] - u[i] - exact).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let g = TriangleGrid::new(3.0, 9).unwrap();
        let k = solve_kernel(KernelKind::ControllerK, 0.0, &g).unwrap();
        assert!(matches!(forward_transform(&k, &[0.0; 4]), Err(Error::Usage(_))));
    }
}
