//! Acceptance checks. Each takes the base scenario and reports pass/fail
//! with the measured numbers.

use std::time::Instant;

use super::manifest::CheckOutcome;
use crate::analysis::{decay_fit, dissipation_check, l2_norm, lyapunov_constants};
use crate::cloop::{feedback_kappa, run, ControlMode, SimConfig, Trajectory};
use crate::error::{Error, Result};
use crate::fdm::SchemeMode;
use crate::kernels::residuals::{diagonal_slopes, interior_residual, kernel_residuals};
use crate::kernels::{extract_observer_gain, solve_kernel, GainVectors, KernelKind, TriangleGrid};

fn outcome(id: u8, name: &str, result: Result<(bool, String)>) -> CheckOutcome {
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome {
        id,
        name: name.into(),
        passed,
        detail,
    }
}

fn gains(cfg: &SimConfig) -> Result<GainVectors> {
    let grid = TriangleGrid::new(cfg.length, cfg.kernel_m)?;
    let k = solve_kernel(KernelKind::ControllerK, cfg.lambda, &grid)?;
    let p = solve_kernel(KernelKind::ObserverP, cfg.lambda, &grid)?;
    GainVectors::from_tables(&k, &p, cfg.nx)
}

/// Run, mapping a blow-up to a failure message instead of an error.
fn run_or_blowup(cfg: &SimConfig, g: &GainVectors) -> Result<std::result::Result<Trajectory, String>> {
    match run(cfg, g) {
        Ok(t) => Ok(Ok(t)),
        Err(Error::BlowUp { step, time, .. }) => Ok(Err(format!("blow-up at step {step} (t = {time:.4})"))),
        Err(e) => Err(e),
    }
}

/// Controller kernel: diagonal conditions, edge condition, interior convergence order, runtime.
pub fn kernel_certification(cfg: &SimConfig) -> Result<(bool, String)> {
    let m = cfg.kernel_m;
    let coarse = TriangleGrid::new(cfg.length, m)?;
    let fine = TriangleGrid::new(cfg.length, 2 * m)?;
    let t = solve_kernel(KernelKind::ControllerK, cfg.lambda, &coarse)?;
    let start = Instant::now();
    let t2 = solve_kernel(KernelKind::ControllerK, cfg.lambda, &fine)?;
    let fine_secs = start.elapsed().as_secs_f64();

    let scale = 1.0 + t.max_abs();
    let h = coarse.spacing();
    let fd_tol = 10.0 * h * h * scale;
    let diag_value = (0..=m).fold(0.0f64, |a, i| a.max(t.value(i, i).abs()));
    let diag_slope = t.residual_report.get("diag_slope").unwrap_or(f64::INFINITY);
    let slope0 = diagonal_slopes(&t)[0];
    let slope0_err = (slope0 - cfg.lambda * cfg.length / 3.0).abs();
    let fd = kernel_residuals(&t);
    let edge = fd.get("edge").unwrap_or(f64::INFINITY);
    let (r1, r2) = (interior_residual(&t), interior_residual(&t2));
    let order = (r1 / r2).log2();

    let ok = diag_value <= 1e-8 * scale
        && diag_slope <= 1e-8 * scale
        && slope0_err <= fd_tol
        && edge <= fd_tol
        && order >= 1.0
        && fine_secs < 30.0;
    Ok((
        ok,
        format!(
            "diag value {diag_value:.1e}, diag slope {diag_slope:.1e} (tol {:.1e}); k_x(0,0) fd {slope0:.5} \
             vs {:.5}; edge fd {edge:.3e} (tol {fd_tol:.3e}); interior {r1:.3e} -> {r2:.3e}, order {order:.2}; \
             M={} solve {fine_secs:.2}s",
            1e-8 * scale,
            cfg.lambda * cfg.length / 3.0,
            2 * m
        ),
    ))
}

/// `lambda = 0`: zero kernels and gains, closed loop identical to the free plant.
pub fn zero_lambda_exactness(cfg: &SimConfig) -> Result<(bool, String)> {
    let zcfg = SimConfig {
        lambda: 0.0,
        mode: ControlMode::OutputFeedback,
        ..cfg.clone()
    };
    let grid = TriangleGrid::new(cfg.length, cfg.kernel_m)?;
    let mut tables_zero = true;
    for kind in [KernelKind::ControllerK, KernelKind::ObserverP, KernelKind::InverseL] {
        let t = solve_kernel(kind, 0.0, &grid)?;
        tables_zero &= t.values.iter().chain(&t.d_yy_at_l).all(|&v| v == 0.0);
    }
    let g = gains(&zcfg)?;
    let gains_zero = g.k.iter().chain(&g.p1).all(|&v| v == 0.0);

    let free = SimConfig {
        mode: ControlMode::Uncontrolled,
        ..zcfg.clone()
    };
    let plant = |r: Result<Trajectory>| match r {
        Ok(t) => Ok((t.plant, None)),
        Err(Error::BlowUp { step, partial, .. }) => Ok((partial.plant, Some(step))),
        Err(e) => Err(e),
    };
    let (a, sa) = plant(run(&zcfg, &g))?;
    let (b, sb) = plant(run(&free, &g))?;
    let identical = sa == sb
        && a.len() == b.len()
        && a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| x.to_bits() == y.to_bits());
    Ok((
        tables_zero && gains_zero && identical,
        format!(
            "tables zero {tables_zero}, gains zero {gains_zero}, closed loop bitwise equal to free plant {identical} \
             over {} steps",
            a.len()
        ),
    ))
}

/// Reference experiment: final norm, error monotonicity, decay fits, refinement agreement, runtime.
pub fn reference_scenario(cfg: &SimConfig) -> Result<(bool, String)> {
    let g = gains(cfg)?;
    let start = Instant::now();
    let tr = match run_or_blowup(cfg, &g)? {
        Ok(t) => t,
        Err(msg) => return Ok((false, format!("Nx={}: {msg}", cfg.nx))),
    };
    let secs = start.elapsed().as_secs_f64();
    let n = tr.len() - 1;
    let final_ratio = tr.norm_u[n] / tr.norm_u[0];
    let first = tr.times.iter().position(|&t| t >= 1.0 - 1e-9).unwrap_or(n);
    let monotone = tr.norm_err[first..].windows(2).all(|w| w[1] <= w[0]);
    let peak = tr.norm_err.iter().cloned().fold(0.0f64, f64::max);
    let err_ratio = tr.norm_err[n] / peak;
    let fu = decay_fit(&tr.times, &tr.norm_u, (2.0, 10.0))?;
    let fe = decay_fit(&tr.times, &tr.norm_err, (2.0, 10.0))?;

    let fine = SimConfig {
        nx: 2 * cfg.nx,
        nt: 2 * cfg.nt,
        kernel_m: 2 * cfg.kernel_m,
        ..cfg.clone()
    };
    let reference = match run_or_blowup(&fine, &gains(&fine)?)? {
        Ok(t) => t,
        Err(msg) => return Ok((false, format!("reference Nx={}: {msg}", fine.nx))),
    };
    let ref_final = reference.norm_u[reference.len() - 1];
    let agree = (tr.norm_u[n] - ref_final).abs() <= 0.1 * ref_final;

    let ok = final_ratio <= 0.05
        && monotone
        && err_ratio <= 0.05
        && fu.rate >= 0.5
        && fe.rate >= 0.5
        && fu.rsq >= 0.9
        && fe.rsq >= 0.9
        && agree
        && secs < 5.0;
    Ok((
        ok,
        format!(
            "|u(T)|/|u0| {final_ratio:.3e}, error monotone after t=1 {monotone}, error final/peak {err_ratio:.3e}, \
             rates u {:.3} (rsq {:.3}) err {:.3} (rsq {:.3}), Nx={} final {:.4e} vs reference {ref_final:.4e}, \
             {secs:.2}s",
            fu.rate, fu.rsq, fe.rate, fe.rsq, cfg.nx, tr.norm_u[n]
        ),
    ))
}

/// `uhat0 = u0` keeps observer and plant together.
///
/// Run linear: the nonlinear reference data leaves the stabilized region.
pub fn separation_identity(cfg: &SimConfig) -> Result<(bool, String)> {
    let scfg = SimConfig {
        mode: ControlMode::OutputFeedback,
        nonlinear: false,
        uhat0: cfg.u0.clone(),
        ..cfg.clone()
    };
    let tr = run(&scfg, &gains(&scfg)?)?;
    let mut gap: f64 = 0.0;
    for (u, o) in tr.plant.iter().zip(&tr.observer) {
        for (a, b) in u.iter().zip(o) {
            gap = gap.max((a - b).abs());
        }
    }
    Ok((
        gap <= 1e-10,
        format!("max |u - uhat| {gap:.3e} over {} steps, linear", tr.len()),
    ))
}

/// Free linear plant loses energy every step.
pub fn uncontrolled_dissipation(cfg: &SimConfig) -> Result<(bool, String)> {
    let ucfg = SimConfig {
        mode: ControlMode::Uncontrolled,
        nonlinear: false,
        scheme: SchemeMode::ConsistentEuler,
        ..cfg.clone()
    };
    let tr = run(&ucfg, &GainVectors::zero(ucfg.nx, ucfg.length))?;
    let r = dissipation_check(&tr)?;
    Ok((
        r.passed(),
        format!(
            "{} steps, max relative growth {:.3e}, first violation {:?}",
            r.steps, r.max_violation, r.first_violation
        ),
    ))
}

/// Lyapunov weights and their rate against the measured linear closed-loop decay.
pub fn lyapunov_certificate(cfg: &SimConfig) -> Result<(bool, String)> {
    let grid = TriangleGrid::new(cfg.length, cfg.kernel_m)?;
    let k = solve_kernel(KernelKind::ControllerK, cfg.lambda, &grid)?;
    let p = solve_kernel(KernelKind::ObserverP, cfg.lambda, &grid)?;
    let p1 = extract_observer_gain(&p, cfg.kernel_m)?;
    let c = lyapunov_constants(&k, &p1, cfg.lambda, 0.1)?;
    let conditions = c.a >= c.d * c.d / (2.0 * cfg.lambda) && c.b >= c.a * c.a * cfg.length && c.mu > 0.0;

    let lcfg = SimConfig {
        mode: ControlMode::OutputFeedback,
        nonlinear: false,
        ..cfg.clone()
    };
    let tr = run(&lcfg, &GainVectors::from_tables(&k, &p, lcfg.nx)?)?;
    let fu = decay_fit(&tr.times, &tr.norm_u, (2.0, cfg.tfinal))?;
    let fe = decay_fit(&tr.times, &tr.norm_err, (2.0, cfg.tfinal))?;
    let rate = fu.rate.min(fe.rate);
    Ok((
        conditions && rate >= 0.8 * c.mu,
        format!(
            "D {:.4}, A {:.4}, B {:.4}, mu {:.4}; linear rates u {:.3} err {:.3} (need >= {:.4})",
            c.d,
            c.a,
            c.b,
            c.mu,
            fu.rate,
            fe.rate,
            0.8 * c.mu
        ),
    ))
}

/// Trapezoid and fit micro-oracles.
pub fn quadrature_and_fit(cfg: &SimConfig) -> Result<(bool, String)> {
    let n = cfg.nx;
    let len = cfg.length;
    let dx = len / n as f64;
    let x: Vec<f64> = (0..=n).map(|j| j as f64 * dx).collect();
    let ones = vec![1.0; n + 1];
    let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1.0);
    let c_err = rel(feedback_kappa(&ones, &vec![0.75; n + 1], dx)?, 0.75 * len);
    let lin: Vec<f64> = x.iter().map(|x| 2.0 - 0.5 * x).collect();
    let l_err = rel(feedback_kappa(&ones, &lin, dx)?, 2.0 * len - 0.25 * len * len);
    let n_err = rel(l2_norm(&ones, dx), len.sqrt());
    let quad = c_err.max(l_err).max(n_err);

    let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
    let y: Vec<f64> = t.iter().map(|t| (-2.0 * t).exp()).collect();
    let fit = decay_fit(&t, &y, (0.0, 10.0))?;
    let fit_err = (fit.rate - 2.0).abs();
    Ok((
        quad <= 1e-14 && fit_err <= 1e-12,
        format!("trapezoid relative error {quad:.1e}, fitted rate error {fit_err:.1e}"),
    ))
}

/// Both step matrices complete the reference experiment; reports final-norm ratio.
pub fn scheme_comparison(cfg: &SimConfig) -> Result<(bool, String)> {
    let g = gains(cfg)?;
    let mut finals = Vec::new();
    let mut notes = Vec::new();
    for scheme in [SchemeMode::PaperLiteral, SchemeMode::ConsistentEuler] {
        let scfg = SimConfig { scheme, ..cfg.clone() };
        match run_or_blowup(&scfg, &g)? {
            Ok(t) => {
                let f = t.norm_u[t.len() - 1];
                notes.push(format!("{}: final |u| {f:.4e}", scheme.as_str()));
                finals.push(f);
            }
            Err(msg) => notes.push(format!("{}: {msg}", scheme.as_str())),
        }
    }
    let ok = finals.len() == 2;
    if ok {
        notes.push(format!("literal/consistent final-norm ratio {:.4e}", finals[0] / finals[1]));
    }
    Ok((ok, notes.join("; ")))
}

/// All checks for `cfg`; with `lambda = 0` only the ones meaningful without feedback.
pub fn run_checks(cfg: &SimConfig) -> Vec<CheckOutcome> {
    let zero = cfg.lambda == 0.0;
    let mut out = Vec::new();
    if !zero {
        out.push(outcome(1, "kernel certification", kernel_certification(cfg)));
    }
    out.push(outcome(2, "zero-lambda exactness", zero_lambda_exactness(cfg)));
    if !zero {
        out.push(outcome(3, "reference scenario", reference_scenario(cfg)));
    }
    out.push(outcome(4, "separation identity", separation_identity(cfg)));
    out.push(outcome(5, "uncontrolled dissipation", uncontrolled_dissipation(cfg)));
    if !zero {
        out.push(outcome(6, "Lyapunov certificate", lyapunov_certificate(cfg)));
    }
    out.push(outcome(7, "quadrature and fit oracles", quadrature_and_fit(cfg)));
    if !zero {
        out.push(outcome(8, "scheme comparison", scheme_comparison(cfg)));
    }
    out
}
