use std::fmt;
use std::str::FromStr;

use super::collocation::{self, CollocationProblem, PolynomialKernel, Vanishing};
use super::grid::TriangleGrid;
use crate::error::{Error, Result};

/// Tag mixed into cache keys; bump when the solver output changes.
pub const SOLVER_VERSION: &str = "spectral-ls-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// Controller kernel `k`; its trace `k(0, y)` is the feedback gain.
    ControllerK,
    /// Observer kernel `p`; defines the output-injection gain.
    ObserverP,
    /// Kernel `l` of the inverse controller transform.
    InverseL,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::ControllerK => "controller_k",
            KernelKind::ObserverP => "observer_p",
            KernelKind::InverseL => "inverse_l",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "controller_k" => Ok(KernelKind::ControllerK),
            "observer_p" => Ok(KernelKind::ObserverP),
            "inverse_l" => Ok(KernelKind::InverseL),
            other => Err(Error::Format(format!("unknown kernel kind `{other}`"))),
        }
    }
}

/// Named maximum residuals plus the spacing they were measured at.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidualReport {
    pub spacing: f64,
    pub entries: Vec<(String, f64)>,
}

impl ResidualReport {
    pub fn new(spacing: f64) -> Self {
        Self {
            spacing,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, value: f64) {
        self.entries.push((name.to_string(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "h={:e}", self.spacing)?;
        for (name, value) in &self.entries {
            writeln!(f, "{name}={value:e}")?;
        }
        Ok(())
    }
}

/// Degree schedule and acceptance threshold for the spectral solve.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Polynomial degrees tried in order; the first whose samples agree with
    /// the previous degree within `agreement` is accepted.
    pub degrees: Vec<usize>,
    pub agreement: f64,
    /// Continuous residuals must stay below `accept * (1 + max|K|)`.
    pub accept: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            degrees: vec![14, 18, 22, 26],
            agreement: 1e-6,
            accept: 1e-5,
        }
    }
}

/// Kernel sampled on a [`TriangleGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub kind: KernelKind,
    pub grid: TriangleGrid,
    pub lambda: f64,
    /// Node values in grid storage order.
    pub values: Vec<f64>,
    /// `K_yy(x_i, L)` for `i = 0..=M`.
    pub d_yy_at_l: Vec<f64>,
    pub residual_report: ResidualReport,
}

impl KernelTable {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.offset(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Identically zero table (the exact solution for `lambda = 0`).
    pub fn zero(kind: KernelKind, grid: TriangleGrid, lambda: f64) -> Self {
        let mut report = ResidualReport::new(grid.spacing());
        for name in report_names(kind) {
            report.push(name, 0.0);
        }
        Self {
            kind,
            grid,
            lambda,
            values: vec![0.0; grid.node_count()],
            d_yy_at_l: vec![0.0; grid.subdivisions() + 1],
            residual_report: report,
        }
    }
}

fn report_names(kind: KernelKind) -> &'static [&'static str] {
    match kind {
        KernelKind::ControllerK | KernelKind::InverseL => &["pde", "diag_value", "diag_slope", "edge"],
        KernelKind::ObserverP => &[
            "pde",
            "diag_value",
            "diag_slope",
            "edge_x0",
            "diag_slope_stated",
            "diag_second_order",
            "px_at_corner_l",
        ],
    }
}

/// The kernel boundary-value problem for `kind`, written for the collocation solver.
///
/// `observer_p` is solved for `F(a, b) = p(L - b, L - a)`, which lives on the
/// same triangle and has `F = 0` on the top edge.
fn problem_parts(kind: KernelKind, lambda: f64) -> (f64, Vanishing, bool) {
    match kind {
        KernelKind::ControllerK => (lambda, Vanishing::Diagonal, true),
        KernelKind::InverseL => (-lambda, Vanishing::Diagonal, true),
        KernelKind::ObserverP => (lambda, Vanishing::DiagonalAndTop, false),
    }
}

fn solve_polynomial(kind: KernelKind, lambda: f64, len: f64, degree: usize) -> Result<PolynomialKernel> {
    let (reaction, vanishing, has_edge) = problem_parts(kind, lambda);
    let zero = |_: f64, _: f64| 0.0;
    let slope = move |s: f64| lambda * (len - s) / 3.0;
    let edge_zero = |_: f64| 0.0;
    let problem = CollocationProblem {
        length: len,
        reaction,
        forcing: &zero,
        diag_slope: &slope,
        vanishing,
        edge: if has_edge { Some(&edge_zero) } else { None },
    };
    collocation::solve(&problem, degree)
}

/// Samples in grid storage order, plus `K_yy(x_i, L)`.
fn sample(kind: KernelKind, poly: &PolynomialKernel, grid: &TriangleGrid) -> (Vec<f64>, Vec<f64>) {
    let len = grid.length();
    let m = grid.subdivisions();
    match kind {
        KernelKind::ControllerK | KernelKind::InverseL => {
            let values = grid
                .nodes()
                .map(|(i, j)| poly.eval(grid.coord(i), grid.coord(j), 0, 0))
                .collect();
            let dyy = (0..=m).map(|i| poly.eval(grid.coord(i), len, 0, 2)).collect();
            (values, dyy)
        }
        KernelKind::ObserverP => {
            // p(x_i, y_j) = F(x_{M-j}, x_{M-i}); p_yy(x, L) = F_aa(0, L - x)
            let values = grid
                .nodes()
                .map(|(i, j)| poly.eval(grid.coord(m - j), grid.coord(m - i), 0, 0))
                .collect();
            let dyy = (0..=m).map(|i| poly.eval(0.0, grid.coord(m - i), 2, 0)).collect();
            (values, dyy)
        }
    }
}

/// Residuals of the continuous solution at points distinct from the
/// collocation set, in the variables of the original kernel.
fn continuous_residuals(kind: KernelKind, poly: &PolynomialKernel, lambda: f64, grid: &TriangleGrid) -> ResidualReport {
    let len = grid.length();
    let check = collocation::interior_points(poly.degree() + 5, len);
    let edge = collocation::boundary_points(4 * poly.degree() + 3, len);
    let mut report = ResidualReport::new(grid.spacing());
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |m, v| m.max(v.abs()));

    match kind {
        KernelKind::ControllerK | KernelKind::InverseL => {
            let reaction = if kind == KernelKind::ControllerK { lambda } else { -lambda };
            report.push("pde", max(&mut check.iter().map(|&(x, y)| poly.operator(x, y, reaction))));
            report.push("diag_value", max(&mut edge.iter().map(|&s| poly.eval(s, s, 0, 0))));
            report.push(
                "diag_slope",
                max(&mut edge.iter().map(|&s| poly.eval(s, s, 1, 0) - lambda * (len - s) / 3.0)),
            );
            report.push(
                "edge",
                max(&mut edge.iter().map(|&s| poly.eval(s, len, 0, 0) + poly.eval(s, len, 0, 2))),
            );
        }
        KernelKind::ObserverP => {
            // Same operator in the reflected variables (the reflection flips
            // the sign of every odd-order term).
            report.push("pde", max(&mut check.iter().map(|&(a, b)| poly.operator(a, b, lambda))));
            report.push("diag_value", max(&mut edge.iter().map(|&s| poly.eval(s, s, 0, 0))));
            // p_x(x, x) = -F_b(L - x, L - x); the solved problem has p_x(x, x) = lambda x / 3
            report.push(
                "diag_slope",
                max(&mut edge.iter().map(|&s| -poly.eval(len - s, len - s, 0, 1) - lambda * s / 3.0)),
            );
            report.push("edge_x0", max(&mut edge.iter().map(|&s| poly.eval(len - s, len, 0, 0))));
            // Reported, not enforced: the slope p_x(x, x) = lambda (x - L) / 3
            // cannot hold together with p(0, y) = 0 at the corner (0, 0).
            report.push(
                "diag_slope_stated",
                max(&mut edge.iter().map(|&s| -poly.eval(len - s, len - s, 0, 1) - lambda * (s - len) / 3.0)),
            );
            // 3 p_xx + 3 p_xy = lambda on the diagonal, i.e. p_xx = F_bb, p_xy = F_ab
            report.push(
                "diag_second_order",
                max(&mut edge
                    .iter()
                    .map(|&s| 3.0 * poly.eval(s, s, 0, 2) + 3.0 * poly.eval(s, s, 1, 1) - lambda)),
            );
            // p_x(L, L) = -F_b(0, 0); zero is requested but incompatible with
            // the other diagonal conditions
            report.push("px_at_corner_l", -poly.eval(0.0, 0.0, 0, 1));
        }
    }
    report
}

/// Solve the kernel equation of `kind` and sample it on `grid`.
pub fn solve_kernel(kind: KernelKind, lambda: f64, grid: &TriangleGrid) -> Result<KernelTable> {
    solve_kernel_with(kind, lambda, grid, &SolveOptions::default())
}

pub fn solve_kernel_with(
    kind: KernelKind,
    lambda: f64,
    grid: &TriangleGrid,
    options: &SolveOptions,
) -> Result<KernelTable> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Config(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(KernelTable::zero(kind, *grid, lambda));
    }
    if options.degrees.is_empty() {
        return Err(Error::Config("empty degree schedule".into()));
    }

    let len = grid.length();
    let mut previous: Option<Vec<f64>> = None;
    let mut accepted = None;
    let mut last_change = f64::INFINITY;
    for &degree in &options.degrees {
        let poly = solve_polynomial(kind, lambda, len, degree)?;
        let (values, dyy) = sample(kind, &poly, grid);
        if let Some(prev) = &previous {
            let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            last_change = prev
                .iter()
                .zip(&values)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                / scale;
            if last_change <= options.agreement {
                accepted = Some((poly, values, dyy));
                break;
            }
        }
        previous = Some(values.clone());
        accepted = Some((poly, values, dyy));
    }
    let (poly, values, dyy) = accepted.expect("non-empty schedule");

    let mut report = continuous_residuals(kind, &poly, lambda, grid);
    let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = options.accept * scale;
    report.push("degree", poly.degree() as f64);
    report.push("degree_change", if last_change.is_finite() { last_change } else { 0.0 });
    report.push("accept_tol", tol);

    let enforced: &[&str] = match kind {
        KernelKind::ObserverP => &["pde", "diag_value", "diag_slope", "edge_x0"],
        _ => &["pde", "diag_value", "diag_slope", "edge"],
    };
    for name in enforced {
        let r = report.get(name).unwrap_or(0.0);
        if !(r <= tol) {
            return Err(Error::Convergence(format!(
                "{kind} residual `{name}` = {r:e} exceeds {tol:e} at degree {}",
                poly.degree()
            )));
        }
    }

    Ok(KernelTable {
        kind,
        grid: *grid,
        lambda,
        values,
        d_yy_at_l: dyy,
        residual_report: report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reference_grid(m: usize) -> TriangleGrid {
        TriangleGrid::new(2.0 * PI, m).unwrap()
    }

    #[test]
    fn zero_lambda_is_exactly_zero() {
        for kind in [KernelKind::ControllerK, KernelKind::ObserverP, KernelKind::InverseL] {
            let t = solve_kernel(kind, 0.0, &reference_grid(12)).unwrap();
            assert!(t.values.iter().all(|&v| v == 0.0));
            assert!(t.d_yy_at_l.iter().all(|&v| v == 0.0));
            assert!(t.residual_report.entries.iter().all(|(_, v)| *v == 0.0));
        }
    }

    #[test]
    fn rejects_negative_lambda() {
        assert!(matches!(
            solve_kernel(KernelKind::ControllerK, -1.0, &reference_grid(10)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn controller_kernel_meets_its_conditions() {
        let t = solve_kernel(KernelKind::ControllerK, 2.0, &reference_grid(30)).unwrap();
        let r = &t.residual_report;
        let scale = 1.0 + t.max_abs();
        assert!(r.get("pde").unwrap() < 1e-5 * scale, "{r}");
        assert!(r.get("diag_value").unwrap() == 0.0);
        assert!(r.get("diag_slope").unwrap() < 1e-8 * scale, "{r}");
        assert!(r.get("edge").unwrap() < 1e-8 * scale, "{r}");
        for i in 0..=30 {
            assert_eq!(t.value(i, i), 0.0);
        }
    }

    #[test]
    fn observer_kernel_vanishes_on_diagonal_and_left_edge() {
        let g = reference_grid(30);
        let t = solve_kernel(KernelKind::ObserverP, 2.0, &g).unwrap();
        for i in 0..=30 {
            assert_eq!(t.value(i, i), 0.0);
            assert_eq!(t.value(0, i), 0.0);
        }
        assert_eq!(t.d_yy_at_l[0], 0.0);
        // the slope demanded at (L, L) is incompatible with p(0, y) = 0 at the
        // opposite corner; the report exposes the offset lambda L / 3
        let off = t.residual_report.get("diag_slope_stated").unwrap();
        assert!((off - 2.0 * 2.0 * PI / 3.0).abs() < 1e-6, "{off}");
    }
}
