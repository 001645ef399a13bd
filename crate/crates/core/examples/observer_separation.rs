//! Start the observer at the plant's initial state and watch the two
//! trajectories stay together, then compare with a zero start.
//!
//! ```text
//! cargo run --example observer_separation -- [amplitude]
//! ```

use kdv_backstep::cloop::{run, Profile, SimConfig};
use kdv_backstep::kernels::{solve_kernel, GainVectors, KernelKind, TriangleGrid};

fn main() -> kdv_backstep::Result<()> {
    let amplitude: f64 = std::env::args().nth(1).map_or(0.05, |s| s.parse().expect("amplitude"));
    let base = SimConfig {
        u0: Profile::Sin(amplitude),
        ..SimConfig::default()
    };
    let grid = TriangleGrid::new(base.length, base.kernel_m)?;
    let k = solve_kernel(KernelKind::ControllerK, base.lambda, &grid)?;
    let p = solve_kernel(KernelKind::ObserverP, base.lambda, &grid)?;
    let gains = GainVectors::from_tables(&k, &p, base.nx)?;

    for (label, uhat0) in [("matched", base.u0.clone()), ("zero", Profile::Zero)] {
        let cfg = SimConfig {
            uhat0,
            ..base.clone()
        };
        let tr = run(&cfg, &gains)?;
        let gap = tr
            .plant
            .iter()
            .zip(&tr.observer)
            .flat_map(|(u, o)| u.iter().zip(o).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let last = tr.len() - 1;
        println!(
            "{label:>8} start: max |u - uhat| = {gap:.3e}, |u - uhat|(T) = {:.3e}, |u|(T) = {:.3e}",
            tr.norm_err[last], tr.norm_u[last]
        );
    }
    Ok(())
}
