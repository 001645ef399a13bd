//! Norms, Lyapunov constants, decay-rate fits and dissipation checks.

use crate::cloop::Trajectory;
use crate::error::{Error, Result};
use crate::kernels::{KernelKind, KernelTable};

/// Trapezoid approximation of the `L^2(0, L)` norm of uniform samples.
pub fn l2_norm(state: &[f64], dx: f64) -> f64 {
    match state {
        [] => 0.0,
        [_] => 0.0,
        [first, .., last] => {
            let inner: f64 = state.iter().map(|v| v * v).sum();
            let sq = dx * (inner - 0.5 * (first * first + last * last));
            // clamp rounding below zero without swallowing NaN
            if sq < 0.0 { 0.0 } else { sq.sqrt() }
        }
    }
}

/// Weights of `V = A V1 + B V2` and the rate they certify.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConstants {
    pub d: f64,
    pub a: f64,
    pub b: f64,
    pub mu: f64,
}

/// `D = max_x |p1(x) - int_x^L k(x, y) p1(y) dy|` on the kernel grid, then
/// `A = D^2 (1 + margin) / (2 lambda)`, `B = A^2 L` and `mu = lambda - D^2 / (2A)`.
///
/// `p1` is sampled on the kernel grid. When `D = 0`, `A = 1` and `mu = lambda`.
pub fn lyapunov_constants(k: &KernelTable, p1: &[f64], lambda: f64, margin: f64) -> Result<LyapunovConstants> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    if !(margin > 0.0) {
        return Err(Error::Config(format!("margin must be positive, got {margin}")));
    }
    if k.kind != KernelKind::ControllerK {
        return Err(Error::Usage(format!("expected a controller_k table, got {}", k.kind)));
    }
    let m = k.grid.subdivisions();
    if p1.len() != m + 1 {
        return Err(Error::Usage(format!("p1 has {} samples, kernel grid has {}", p1.len(), m + 1)));
    }
    let h = k.grid.spacing();
    let mut d: f64 = 0.0;
    for i in 0..=m {
        let tail: f64 = (i..m)
            .map(|j| 0.5 * h * (k.value(i, j) * p1[j] + k.value(i, j + 1) * p1[j + 1]))
            .sum();
        d = d.max((p1[i] - tail).abs());
    }
    let len = k.grid.length();
    let (a, mu) = if d == 0.0 {
        (1.0, lambda)
    } else {
        let a = d * d / (2.0 * lambda) * (1.0 + margin);
        (a, lambda - d * d / (2.0 * a))
    };
    Ok(LyapunovConstants { d, a, b: a * a * len, mu })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Amplitude `C` in `C exp(-rate t)`.
    pub c: f64,
    pub rate: f64,
    pub rsq: f64,
    pub window: (f64, f64),
}

/// Least-squares line through `(t, ln norm)` for samples with `t` in `window`.
pub fn decay_fit(times: &[f64], norms: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(Error::Usage("times and norms differ in length".into()));
    }
    // small slack so nominal window ends survive rounding of t_i = i dt
    let slack = 1e-9 * (1.0 + window.1.abs());
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= window.0 - slack && **t <= window.1 + slack)
        .map(|(&t, &n)| (t, n))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Domain(format!("only {} samples in the fit window", pts.len())));
    }
    if let Some(&(t, n)) = pts.iter().find(|(_, n)| !(*n > 0.0 && n.is_finite())) {
        return Err(Error::Domain(format!("norm {n} at t = {t} cannot be log-fitted")));
    }
    let nf = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let ym = pts.iter().map(|p| p.1.ln()).sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(t, n) in &pts {
        let (dt, dy) = (t - tm, n.ln() - ym);
        sxy += dt * dy;
        sxx += dt * dt;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let rsq = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit {
        c: intercept.exp(),
        rate: -slope,
        rsq,
        window,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipationReport {
    pub steps: usize,
    /// Largest `norm[i+1] / norm[i] - 1` over all steps (0 if none grew).
    pub max_violation: f64,
    /// First step `i` with `norm[i+1] > norm[i] (1 + tol)`.
    pub first_violation: Option<usize>,
}

impl DissipationReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks `norms[i+1] <= norms[i] (1 + tol)` for every step.
pub fn dissipation_check_norms(norms: &[f64], tol: f64) -> DissipationReport {
    let mut max_violation: f64 = 0.0;
    let mut first = None;
    for (i, w) in norms.windows(2).enumerate() {
        let growth = if w[0] > 0.0 {
            w[1] / w[0] - 1.0
        } else if w[1] > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        max_violation = max_violation.max(growth);
        if w[1] > w[0] * (1.0 + tol) && first.is_none() {
            first = Some(i);
        }
    }
    DissipationReport {
        steps: norms.len().saturating_sub(1),
        max_violation,
        first_violation: first,
    }
}

/// Per-step energy check on an uncontrolled run, tolerance `1e-10` relative.
pub fn dissipation_check(traj: &Trajectory) -> Result<DissipationReport> {
    if !traj.observer.is_empty() || traj.control.iter().any(|&k| k != 0.0) {
        return Err(Error::Usage("dissipation check needs an uncontrolled trajectory".into()));
    }
    Ok(dissipation_check_norms(&traj.norm_u, 1e-10))
}
