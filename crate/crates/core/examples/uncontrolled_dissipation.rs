//! The open-loop linear plant loses energy through both boundaries; check the
//! discrete norm never grows and print how much is left at the end.
//!
//! ```text
//! cargo run --example uncontrolled_dissipation -- [Nx] [Nt]
//! ```

use kdv_backstep::analysis::dissipation_check;
use kdv_backstep::cloop::{run, ControlMode, SimConfig};
use kdv_backstep::kernels::GainVectors;

fn main() -> kdv_backstep::Result<()> {
    let mut args = std::env::args().skip(1);
    let nx: usize = args.next().map_or(30, |s| s.parse().expect("Nx"));
    let nt: usize = args.next().map_or(167, |s| s.parse().expect("Nt"));
    let cfg = SimConfig {
        mode: ControlMode::Uncontrolled,
        nonlinear: false,
        nx,
        nt,
        ..SimConfig::default()
    };
    let tr = run(&cfg, &GainVectors::zero(nx, cfg.length))?;
    let report = dissipation_check(&tr)?;
    println!(
        "{} steps, largest growth {:.3e}, first violation {:?}",
        report.steps, report.max_violation, report.first_violation
    );
    println!("|u|(0) = {:.6}, |u|(T) = {:.6}", tr.norm_u[0], tr.norm_u[tr.len() - 1]);
    Ok(())
}
