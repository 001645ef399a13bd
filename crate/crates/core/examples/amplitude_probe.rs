//! Scan the initial amplitude of the nonlinear output-feedback loop and
//! report which runs decay and which blow up.
//!
//! ```text
//! cargo run --example amplitude_probe -- [a1 a2 ...]
//! ```

use kdv_backstep::cloop::{run, Profile, SimConfig};
use kdv_backstep::kernels::{solve_kernel, GainVectors, KernelKind, TriangleGrid};
use kdv_backstep::Error;

fn main() -> kdv_backstep::Result<()> {
    let mut amplitudes: Vec<f64> = std::env::args().skip(1).map(|s| s.parse().expect("amplitude")).collect();
    if amplitudes.is_empty() {
        amplitudes = vec![0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0];
    }
    let base = SimConfig::default();
    let grid = TriangleGrid::new(base.length, base.kernel_m)?;
    let k = solve_kernel(KernelKind::ControllerK, base.lambda, &grid)?;
    let p = solve_kernel(KernelKind::ObserverP, base.lambda, &grid)?;
    let gains = GainVectors::from_tables(&k, &p, base.nx)?;

    for a in amplitudes {
        let cfg = SimConfig {
            u0: Profile::Sin(a),
            ..base.clone()
        };
        match run(&cfg, &gains) {
            Ok(tr) => {
                let peak = tr.norm_u.iter().cloned().fold(0.0, f64::max);
                println!(
                    "amplitude {a:<6} decays: |u|(T)/|u|(0) = {:.3e}, peak/initial = {:.1}",
                    tr.norm_u[tr.len() - 1] / tr.norm_u[0],
                    peak / tr.norm_u[0]
                );
            }
            Err(Error::BlowUp { step, time, .. }) => println!("amplitude {a:<6} blows up at step {step} (t = {time:.3})"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
