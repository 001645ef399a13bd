use kdv_backstep::analysis::{decay_fit, l2_norm};
use kdv_backstep::cloop::{run, ControlMode, Profile, SimConfig, Trajectory};
use kdv_backstep::fdm::{build_operators, fixed_point_step, SchemeMode};
use kdv_backstep::kernels::{solve_kernel, GainVectors, KernelKind, TriangleGrid};

fn gains(cfg: &SimConfig) -> GainVectors {
    let grid = TriangleGrid::new(cfg.length, cfg.kernel_m).unwrap();
    let k = solve_kernel(KernelKind::ControllerK, cfg.lambda, &grid).unwrap();
    let p = solve_kernel(KernelKind::ObserverP, cfg.lambda, &grid).unwrap();
    GainVectors::from_tables(&k, &p, cfg.nx).unwrap()
}

fn simulate(cfg: &SimConfig) -> Trajectory {
    run(cfg, &gains(cfg)).unwrap()
}

fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn matched_observer_tracks_the_plant() {
    for nonlinear in [false, true] {
        let cfg = SimConfig {
            uhat0: Profile::Sin(1.0),
            nonlinear,
            u0: Profile::Sin(0.05),
            ..SimConfig::default()
        };
        let cfg = SimConfig { uhat0: cfg.u0.clone(), ..cfg };
        let tr = simulate(&cfg);
        let peak = tr.norm_u.iter().cloned().fold(0.0, f64::max);
        assert!(max_gap(&tr.plant, &tr.observer) <= 1e-10 * peak, "nonlinear={nonlinear}");
    }
}

#[test]
fn zero_gains_reduce_to_the_uncontrolled_plant() {
    let base = SimConfig {
        lambda: 0.0,
        nonlinear: false,
        ..SimConfig::default()
    };
    let closed = simulate(&base);
    let open = simulate(&SimConfig {
        mode: ControlMode::Uncontrolled,
        ..base
    });
    assert_eq!(closed.plant, open.plant);
    assert!(closed.control.iter().all(|&k| k == 0.0));
}

#[test]
fn linear_runs_ignore_the_iteration_count() {
    let one = SimConfig {
        nonlinear: false,
        niter: 1,
        ..SimConfig::default()
    };
    let five = SimConfig { niter: 5, ..one.clone() };
    let g = gains(&one);
    let (a, b) = (run(&one, &g).unwrap(), run(&five, &g).unwrap());
    assert_eq!(a.plant, b.plant);
    assert_eq!(a.observer, b.observer);
}

#[test]
fn runs_are_deterministic() {
    let cfg = SimConfig {
        nonlinear: false,
        ..SimConfig::default()
    };
    let g = gains(&cfg);
    assert_eq!(run(&cfg, &g).unwrap(), run(&cfg, &g).unwrap());
}

// Reference numbers from the linear closed loop on the reference grid.
#[test]
fn linear_closed_loop_goldens() {
    let sf = simulate(&SimConfig {
        mode: ControlMode::StateFeedback,
        nonlinear: false,
        ..SimConfig::default()
    });
    let fit = decay_fit(&sf.times, &sf.norm_u, (2.0, 10.0)).unwrap();
    assert!((fit.rate - 1.79236).abs() < 1e-4, "state feedback rate {}", fit.rate);
    assert!(fit.rsq > 0.99);

    let of = simulate(&SimConfig {
        nonlinear: false,
        ..SimConfig::default()
    });
    let fu = decay_fit(&of.times, &of.norm_u, (2.0, 10.0)).unwrap();
    let fe = decay_fit(&of.times, &of.norm_err, (2.0, 10.0)).unwrap();
    assert!((fu.rate - 1.54882).abs() < 1e-4, "output feedback rate {}", fu.rate);
    assert!((fe.rate - 1.40455).abs() < 1e-4, "error rate {}", fe.rate);
    let last = of.len() - 1;
    assert!((of.norm_u[last] / 1.231382e-5 - 1.0).abs() < 1e-4);
    assert!((of.norm_err[last] / 4.371104e-6 - 1.0).abs() < 1e-4);
}

#[test]
fn small_amplitude_nonlinear_run_decays() {
    let tr = simulate(&SimConfig {
        u0: Profile::Sin(0.1),
        ..SimConfig::default()
    });
    let last = tr.len() - 1;
    assert!(tr.norm_u[last] <= 0.05 * tr.norm_u[0]);
    let fit = decay_fit(&tr.times, &tr.norm_err, (2.0, 10.0)).unwrap();
    assert!(fit.rate >= 0.5 && fit.rsq >= 0.9, "{fit:?}");
}

/// Iterates of the first plant step on the reference scenario.
fn first_step_iterates(max: usize) -> Vec<Vec<f64>> {
    let cfg = SimConfig::default();
    let grid = cfg.grid().unwrap();
    let ops = build_operators(grid, SchemeMode::ConsistentEuler).unwrap();
    let u0: Vec<f64> = grid.nodes().iter().map(|x| x.sin()).collect();
    let zero = vec![0.0; grid.nx + 1];
    // the observer starts at zero, so the first control value is zero
    (1..=max)
        .map(|n| fixed_point_step(&ops, &u0, &zero, 0.0, n, true).unwrap())
        .collect()
}

fn relative_update(a: &[f64], b: &[f64], dx: f64) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    l2_norm(&d, dx) / l2_norm(b, dx)
}

#[test]
fn fixed_point_iteration_contracts() {
    let dx = SimConfig::default().grid().unwrap().dx();
    let its = first_step_iterates(50);
    let updates: Vec<f64> = its.windows(2).map(|w| relative_update(&w[0], &w[1], dx)).collect();
    for w in updates.windows(2).take(8) {
        assert!(w[1] < 0.2 * w[0], "{} -> {}", w[0], w[1]);
    }
    assert!(relative_update(&its[4], &its[49], dx) < 1e-5);
}

#[test]
fn fixed_point_update_after_five_iterations() {
    let dx = SimConfig::default().grid().unwrap().dx();
    let its = first_step_iterates(5);
    let rel = relative_update(&its[3], &its[4], dx);
    println!("relative update between iterates 4 and 5: {rel:e}");
    assert!(rel <= 1e-6, "relative update {rel:e}");
}

#[test]
fn refinement_changes_final_norm_by_at_most_ten_percent() {
    let coarse = SimConfig::default();
    let fine = SimConfig {
        nx: 60,
        nt: 334,
        kernel_m: 60,
        ..SimConfig::default()
    };
    let a = run(&coarse, &gains(&coarse)).map(|t| t.norm_u[t.len() - 1]);
    let b = run(&fine, &gains(&fine)).map(|t| t.norm_u[t.len() - 1]);
    match (a, b) {
        (Ok(a), Ok(b)) => assert!((a - b).abs() <= 0.1 * b, "final norms {a} vs {b}"),
        (a, b) => {
            let show = |r: kdv_backstep::Result<f64>| r.map_or_else(|e| e.to_string(), |v| v.to_string());
            panic!("reference runs did not complete: Nx=30: {}; Nx=60: {}", show(a), show(b))
        }
    }
}
