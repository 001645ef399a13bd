//! Lyapunov weights for the reference gains and the decay rate they certify,
//! next to the rates fitted on the linear closed loop.
//!
//! ```text
//! cargo run --example lyapunov_certificate -- [margin]
//! ```

use kdv_backstep::analysis::{decay_fit, lyapunov_constants};
use kdv_backstep::cloop::{run, ControlMode, SimConfig};
use kdv_backstep::kernels::{extract_observer_gain, solve_kernel, GainVectors, KernelKind, TriangleGrid};

fn main() -> kdv_backstep::Result<()> {
    let margin: f64 = std::env::args().nth(1).map_or(0.1, |s| s.parse().expect("margin"));
    let cfg = SimConfig {
        nonlinear: false,
        ..SimConfig::default()
    };
    let grid = TriangleGrid::new(cfg.length, cfg.kernel_m)?;
    let k = solve_kernel(KernelKind::ControllerK, cfg.lambda, &grid)?;
    let p = solve_kernel(KernelKind::ObserverP, cfg.lambda, &grid)?;
    let p1 = extract_observer_gain(&p, cfg.kernel_m)?;

    let c = lyapunov_constants(&k, &p1, cfg.lambda, margin)?;
    println!("D = {:.6}  A = {:.6e}  B = {:.6e}  mu = {:.6}", c.d, c.a, c.b, c.mu);

    let gains = GainVectors::from_tables(&k, &p, cfg.nx)?;
    for mode in [ControlMode::StateFeedback, ControlMode::OutputFeedback] {
        let tr = run(&SimConfig { mode, ..cfg.clone() }, &gains)?;
        let fit = decay_fit(&tr.times, &tr.norm_u, (2.0, cfg.tfinal))?;
        println!(
            "{:<16} fitted rate {:.4} (rsq {:.4}), ratio to mu {:.2}",
            mode.as_str(),
            fit.rate,
            fit.rsq,
            fit.rate / c.mu
        );
    }
    Ok(())
}
