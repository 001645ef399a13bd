//! Apply the Volterra transform built from `k`, then its inverse built from
//! `l`, to a few smooth profiles and report the reconstruction error.

use std::f64::consts::PI;

use kdv_backstep::analysis::l2_norm;
use kdv_backstep::kernels::{forward_transform, inverse_transform, solve_kernel, KernelKind, TriangleGrid};

fn main() -> kdv_backstep::Result<()> {
    let m: usize = std::env::args().nth(1).map_or(30, |s| s.parse().expect("M"));
    let grid = TriangleGrid::new(2.0 * PI, m)?;
    let k = solve_kernel(KernelKind::ControllerK, 2.0, &grid)?;
    let l = solve_kernel(KernelKind::InverseL, 2.0, &grid)?;
    let h = grid.spacing();

    let profiles: [(&str, fn(f64) -> f64); 5] = [
        ("sin x", |x| x.sin()),
        ("cos 2x", |x| (2.0 * x).cos()),
        ("x (2pi - x)", |x| x * (2.0 * PI - x) / 10.0),
        ("exp(-(x-3)^2)", |x| (-(x - 3.0) * (x - 3.0)).exp()),
        ("1 + x/5", |x| 1.0 + x / 5.0),
    ];
    for (name, f) in profiles {
        let u: Vec<f64> = (0..=m).map(|i| f(grid.coord(i))).collect();
        let w = forward_transform(&k, &u)?;
        let back = inverse_transform(&l, &w)?;
        let diff: Vec<f64> = u.iter().zip(&back).map(|(a, b)| a - b).collect();
        println!(
            "{name:<16} |w|/|u| = {:8.3}   reconstruction error {:.3e}",
            l2_norm(&w, h) / l2_norm(&u, h),
            l2_norm(&diff, h) / l2_norm(&u, h)
        );
    }
    Ok(())
}
