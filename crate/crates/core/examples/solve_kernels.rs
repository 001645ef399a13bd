//! Solve the controller, observer and inverse kernels for the reference
//! parameters and print their gains and residuals.
//!
//! ```text
//! cargo run --example solve_kernels -- [lambda] [M]
//! ```

use std::f64::consts::PI;
use std::time::Instant;

use kdv_backstep::kernels::{
    extract_feedback_gain, extract_observer_gain, kernel_residuals, solve_kernel, KernelKind, TriangleGrid,
};

fn main() -> kdv_backstep::Result<()> {
    let mut args = std::env::args().skip(1);
    let lambda: f64 = args.next().map_or(2.0, |s| s.parse().expect("lambda"));
    let m: usize = args.next().map_or(30, |s| s.parse().expect("M"));
    let grid = TriangleGrid::new(2.0 * PI, m)?;

    for kind in [KernelKind::ControllerK, KernelKind::ObserverP, KernelKind::InverseL] {
        let start = Instant::now();
        let table = solve_kernel(kind, lambda, &grid)?;
        println!("{kind}: solved in {:.2?}, max|K| = {:.6}", start.elapsed(), table.max_abs());
        println!("  solver residuals:");
        for (name, v) in &table.residual_report.entries {
            println!("    {name:<18} {v:.3e}");
        }
        println!("  grid residuals (h = {:.4}):", grid.spacing());
        for (name, v) in &kernel_residuals(&table).entries {
            println!("    {name:<18} {v:.3e}");
        }
        match kind {
            KernelKind::ControllerK => {
                let k = extract_feedback_gain(&table, m)?;
                println!("  k(0, y) every 5th node: {:?}", k.iter().step_by(5).map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>());
                if m % 2 == 0 {
                    println!("  k(0, pi) = {:.8}", k[m / 2]);
                }
            }
            KernelKind::ObserverP => {
                let p1 = extract_observer_gain(&table, m)?;
                println!("  p1(x) every 5th node: {:?}", p1.iter().step_by(5).map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>());
            }
            KernelKind::InverseL => {}
        }
    }
    Ok(())
}
