//! Output-feedback closed loop for the reference experiment: `L = 2 pi`,
//! `Nx = 30`, `Nt = 167`, `T = 10`, `lambda = 2`, `u0 = sin`, `uhat0 = 0`.
//!
//! ```text
//! cargo run --example reference_scenario -- [linear] [amplitude]
//! ```
//!
//! Prints the norm series every tenth step and decay fits over `[2, 10]`.
//! The nonlinear run at unit amplitude leaves the region where the feedback
//! stabilizes and blows up; the partial series is printed in that case.

use kdv_backstep::analysis::decay_fit;
use kdv_backstep::cloop::{run, Profile, SimConfig, Trajectory};
use kdv_backstep::kernels::{solve_kernel, GainVectors, KernelKind, TriangleGrid};
use kdv_backstep::Error;

fn print_series(tr: &Trajectory) {
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "t", "|u|", "|uhat|", "|u-uhat|", "kappa");
    for i in (0..tr.len()).step_by(10).chain(std::iter::once(tr.len() - 1)) {
        println!(
            "{:>8.3} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            tr.times[i], tr.norm_u[i], tr.norm_uhat[i], tr.norm_err[i], tr.control[i]
        );
    }
}

fn main() -> kdv_backstep::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let linear = args.iter().any(|a| a == "linear");
    let amplitude: f64 = args
        .iter()
        .find_map(|a| a.parse().ok())
        .unwrap_or(1.0);

    let config = SimConfig {
        nonlinear: !linear,
        u0: Profile::Sin(amplitude),
        ..SimConfig::default()
    };
    let grid = TriangleGrid::new(config.length, config.kernel_m)?;
    let k = solve_kernel(KernelKind::ControllerK, config.lambda, &grid)?;
    let p = solve_kernel(KernelKind::ObserverP, config.lambda, &grid)?;
    let gains = GainVectors::from_tables(&k, &p, config.nx)?;

    println!(
        "{} run, u0 = {}, scheme {}",
        if config.nonlinear { "nonlinear" } else { "linear" },
        config.u0,
        config.scheme.as_str()
    );
    match run(&config, &gains) {
        Ok(tr) => {
            print_series(&tr);
            for (name, series) in [("|u|", &tr.norm_u), ("|u-uhat|", &tr.norm_err)] {
                let fit = decay_fit(&tr.times, series, (2.0, 10.0))?;
                println!("fit {name:<9} rate {:.4}  C {:.4}  rsq {:.4}", fit.rate, fit.c, fit.rsq);
            }
            println!("final/initial |u| = {:.3e}", tr.norm_u[tr.len() - 1] / tr.norm_u[0]);
        }
        Err(Error::BlowUp { step, time, iterate, partial }) => {
            print_series(&partial);
            println!("blow-up at step {step} (t = {time:.4}), fixed-point iterate {iterate}");
        }
        Err(e) => return Err(e),
    }
    Ok(())
}
