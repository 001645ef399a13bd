//! Finite-difference residuals of a sampled kernel, computed only from the
//! node values so they certify the table independently of how it was solved.

use super::table::{KernelKind, KernelTable, ResidualReport};

/// `V(i, j)` with `i <= j`.
struct View<'a> {
    t: &'a KernelTable,
    h: f64,
    m: usize,
}

impl View<'_> {
    fn v(&self, i: usize, j: usize) -> f64 {
        self.t.value(i, j)
    }

    // centered stencils, second order
    fn dx(&self, i: usize, j: usize) -> f64 {
        (self.v(i + 1, j) - self.v(i - 1, j)) / (2.0 * self.h)
    }

    fn dy(&self, i: usize, j: usize) -> f64 {
        (self.v(i, j + 1) - self.v(i, j - 1)) / (2.0 * self.h)
    }

    fn dxxx(&self, i: usize, j: usize) -> f64 {
        (self.v(i + 2, j) - 2.0 * self.v(i + 1, j) + 2.0 * self.v(i - 1, j) - self.v(i - 2, j))
            / (2.0 * self.h.powi(3))
    }

    fn dyyy(&self, i: usize, j: usize) -> f64 {
        (self.v(i, j + 2) - 2.0 * self.v(i, j + 1) + 2.0 * self.v(i, j - 1) - self.v(i, j - 2))
            / (2.0 * self.h.powi(3))
    }
}

/// Coefficient `c` in `K_xxx + K_yyy + K_x + K_y + c K = 0` for each kind.
fn reaction(kind: KernelKind, lambda: f64) -> f64 {
    match kind {
        KernelKind::ControllerK => lambda,
        KernelKind::InverseL | KernelKind::ObserverP => -lambda,
    }
}

/// Interior residual at every node whose centered stencils stay in the triangle.
pub fn interior_residual(table: &KernelTable) -> f64 {
    let view = View {
        t: table,
        h: table.grid.spacing(),
        m: table.grid.subdivisions(),
    };
    let c = reaction(table.kind, table.lambda);
    let mut worst: f64 = 0.0;
    for i in 2..=view.m {
        for j in (i + 2)..=view.m.saturating_sub(2) {
            let r = view.dxxx(i, j) + view.dyyy(i, j) + view.dx(i, j) + view.dy(i, j) + c * view.v(i, j);
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// `K_x(x_i, x_i)` for `i = 0..=M` from one-sided second-order differences
/// pointing into the triangle.
///
/// Below the last two rows the slope is read as `-K_y` (valid because `K`
/// vanishes on the diagonal); the last two use backward differences in `x`.
pub fn diagonal_slopes(table: &KernelTable) -> Vec<f64> {
    let h = table.grid.spacing();
    let m = table.grid.subdivisions();
    let v = |i, j| table.value(i, j);
    (0..=m)
        .map(|i| {
            if i + 2 <= m {
                -(-3.0 * v(i, i) + 4.0 * v(i, i + 1) - v(i, i + 2)) / (2.0 * h)
            } else {
                (3.0 * v(i, i) - 4.0 * v(i - 1, i) + v(i - 2, i)) / (2.0 * h)
            }
        })
        .collect()
}

/// `K_yy(x_i, L)` from the four nodes nearest the edge, for rows with `i <= M - 3`.
pub fn edge_second_derivative(table: &KernelTable) -> Vec<f64> {
    let h = table.grid.spacing();
    let m = table.grid.subdivisions();
    let v = |i, j| table.value(i, j);
    (0..=m - 3)
        .map(|i| (2.0 * v(i, m) - 5.0 * v(i, m - 1) + 4.0 * v(i, m - 2) - v(i, m - 3)) / (h * h))
        .collect()
}

/// Max residual of the interior equation and of each boundary condition.
pub fn kernel_residuals(table: &KernelTable) -> ResidualReport {
    let grid = &table.grid;
    let len = grid.length();
    let m = grid.subdivisions();
    let lambda = table.lambda;
    let mut report = ResidualReport::new(grid.spacing());
    let fold = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |a, v| a.max(v.abs()));

    report.push("pde", interior_residual(table));
    report.push("diag_value", fold(&mut (0..=m).map(|i| table.value(i, i))));

    let slopes = diagonal_slopes(table);
    match table.kind {
        KernelKind::ControllerK | KernelKind::InverseL => {
            report.push(
                "diag_slope",
                fold(&mut slopes.iter().enumerate().map(|(i, s)| s - lambda * (len - grid.coord(i)) / 3.0)),
            );
            let kyy = edge_second_derivative(table);
            report.push(
                "edge",
                fold(&mut kyy.iter().enumerate().map(|(i, d)| table.value(i, m) + d)),
            );
        }
        KernelKind::ObserverP => {
            report.push(
                "diag_slope_stated",
                fold(&mut slopes.iter().enumerate().map(|(i, s)| s - lambda * (grid.coord(i) - len) / 3.0)),
            );
            report.push(
                "diag_slope",
                fold(&mut slopes.iter().enumerate().map(|(i, s)| s - lambda * grid.coord(i) / 3.0)),
            );
            report.push("edge_x0", fold(&mut (0..=m).map(|j| table.value(0, j))));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{solve_kernel, TriangleGrid};
    use std::f64::consts::PI;

    #[test]
    fn zero_table_has_zero_residuals() {
        let g = TriangleGrid::new(2.0 * PI, 12).unwrap();
        for kind in [KernelKind::ControllerK, KernelKind::ObserverP, KernelKind::InverseL] {
            let t = solve_kernel(kind, 0.0, &g).unwrap();
            let r = kernel_residuals(&t);
            assert!(r.entries.iter().all(|(_, v)| *v == 0.0), "{r}");
        }
    }

    fn table_of(g: TriangleGrid, f: impl Fn(f64, f64) -> f64) -> KernelTable {
        KernelTable {
            values: g.nodes().map(|(i, j)| f(g.coord(i), g.coord(j))).collect(),
            ..KernelTable::zero(KernelKind::ControllerK, g, 0.0)
        }
    }

    #[test]
    fn one_sided_stencils_are_exact_on_quadratics() {
        let g = TriangleGrid::new(3.0, 12).unwrap();
        // vanishes on the diagonal, K_x(s, s) = -(s + 1), K_yy = 2
        let t = table_of(g, |x, y| (y - x) * (x + 1.0) + (y - x).powi(2));
        for (i, s) in diagonal_slopes(&t).iter().enumerate() {
            assert!((s + g.coord(i) + 1.0).abs() < 1e-10, "{i}: {s}");
        }
        for d in edge_second_derivative(&t) {
            assert!((d - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn centered_stencils_are_exact_on_cubics() {
        let g = TriangleGrid::new(3.0, 12).unwrap();
        // K_xxx + K_yyy = 0, K_x + K_y = y - x
        let t = table_of(g, |x, y| (y - x).powi(3) + (y - x) * (x + 1.0));
        let view = View { t: &t, h: g.spacing(), m: 12 };
        for (i, j) in [(2, 4), (3, 8), (5, 10)] {
            let r = view.dxxx(i, j) + view.dyyy(i, j) + view.dx(i, j) + view.dy(i, j);
            assert!((r - (g.coord(j) - g.coord(i))).abs() < 1e-9, "{r}");
        }
        // widest interior stencil: i = 2, j = M - 2
        assert!((interior_residual(&t) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn perturbed_node_shows_up_at_inverse_cube_scale() {
        let g = TriangleGrid::new(2.0 * PI, 30).unwrap();
        let mut t = solve_kernel(KernelKind::ControllerK, 2.0, &g).unwrap();
        let clean = interior_residual(&t);
        let k = g.offset(10, 20);
        t.values[k] += 1.0;
        let h = g.spacing();
        assert!(interior_residual(&t) >= 0.5 / h.powi(3) - clean);
    }
}
