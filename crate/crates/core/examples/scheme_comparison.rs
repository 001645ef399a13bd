//! Run the same scenario with both time-stepping schemes and report how far
//! each gets.
//!
//! ```text
//! cargo run --example scheme_comparison -- [linear]
//! ```

use kdv_backstep::cloop::{run, SimConfig};
use kdv_backstep::fdm::SchemeMode;
use kdv_backstep::kernels::{solve_kernel, GainVectors, KernelKind, TriangleGrid};
use kdv_backstep::Error;

fn main() -> kdv_backstep::Result<()> {
    let linear = std::env::args().any(|a| a == "linear");
    let base = SimConfig {
        nonlinear: !linear,
        ..SimConfig::default()
    };
    let grid = TriangleGrid::new(base.length, base.kernel_m)?;
    let k = solve_kernel(KernelKind::ControllerK, base.lambda, &grid)?;
    let p = solve_kernel(KernelKind::ObserverP, base.lambda, &grid)?;
    let gains = GainVectors::from_tables(&k, &p, base.nx)?;

    let mut finals = Vec::new();
    for scheme in [SchemeMode::ConsistentEuler, SchemeMode::PaperLiteral] {
        let cfg = SimConfig { scheme, ..base.clone() };
        match run(&cfg, &gains) {
            Ok(tr) => {
                let last = tr.norm_u[tr.len() - 1];
                println!("{:<16} |u|(T) = {last:.4e}", scheme.as_str());
                finals.push(last);
            }
            Err(Error::BlowUp { step, time, .. }) => {
                println!("{:<16} blew up at step {step} (t = {time:.4})", scheme.as_str());
            }
            Err(e) => return Err(e),
        }
    }
    if let [a, b] = finals[..] {
        println!("final-norm ratio literal/consistent = {:.4e}", b / a);
    }
    Ok(())
}
