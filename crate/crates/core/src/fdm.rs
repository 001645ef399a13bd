//! Implicit finite-difference step for `u_t + u_x + u_xxx + u u_x = 0`.
//!
//! With `D-` and `D+` the backward and forward difference matrices and
//! `D = (D+ + D-)/2`, the linear part is `A = D+ D+ D- + D`. Two step matrices
//! are available:
//!
//! - [`SchemeMode::ConsistentEuler`]: `C = I + dt A`, which is implicit Euler
//!   for the equation. The first and last two rows of `C` are replaced by the
//!   boundary conditions `u_0 = kappa`, `u_{N-1} = u_{N-2} = u_{N-3}`.
//! - [`SchemeMode::PaperLiteral`]: `C = A + dt I` and the step
//!   `C U^{i+1} = U^i - D (U^{i+1})^2 / 2`, with the boundary values only
//!   overwritten after the solve.

use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeGrid {
    pub length: f64,
    pub nx: usize,
    pub tfinal: f64,
    pub nt: usize,
}

impl SpaceTimeGrid {
    pub fn new(length: f64, nx: usize, tfinal: f64, nt: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Config(format!("L must be positive, got {length}")));
        }
        if !(tfinal.is_finite() && tfinal > 0.0) {
            return Err(Error::Config(format!("Tfinal must be positive, got {tfinal}")));
        }
        if nx < 3 {
            return Err(Error::Config(format!("Nx must be at least 3, got {nx}")));
        }
        if nt == 0 {
            return Err(Error::Config("Nt must be at least 1".into()));
        }
        Ok(Self { length, nx, tfinal, nt })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn dt(&self) -> f64 {
        self.tfinal / self.nt as f64
    }

    /// `x_j = j dx`, `j = 0..=Nx`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.nx)
            .map(|j| if j == self.nx { self.length } else { j as f64 * self.dx() })
            .collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.nt)
            .map(|i| if i == self.nt { self.tfinal } else { i as f64 * self.dt() })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeMode {
    PaperLiteral,
    ConsistentEuler,
}

impl SchemeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeMode::PaperLiteral => "paper_literal",
            SchemeMode::ConsistentEuler => "consistent_euler",
        }
    }

    /// Accepts the config spelling and the short CLI spelling.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "paper_literal" | "literal" => Ok(SchemeMode::PaperLiteral),
            "consistent_euler" | "consistent" => Ok(SchemeMode::ConsistentEuler),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }

    /// Factor in front of the nonlinear term and the injection on the right-hand side.
    pub fn rhs_scale(self, dt: f64) -> f64 {
        match self {
            SchemeMode::PaperLiteral => 1.0,
            SchemeMode::ConsistentEuler => dt,
        }
    }
}

pub struct DiscreteOperators {
    pub grid: SpaceTimeGrid,
    pub mode: SchemeMode,
    pub dminus: DMatrix<f64>,
    pub dplus: DMatrix<f64>,
    pub dc: DMatrix<f64>,
    pub aop: DMatrix<f64>,
    pub cop: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl std::fmt::Debug for DiscreteOperators {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteOperators")
            .field("grid", &self.grid)
            .field("mode", &self.mode)
            .finish_non_exhaustive()
    }
}

/// `(lower, upper)` bandwidth of the nonzero pattern.
pub fn bandwidth(m: &DMatrix<f64>) -> (usize, usize) {
    let mut lower = 0;
    let mut upper = 0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != 0.0 {
                if i > j {
                    lower = lower.max(i - j);
                } else {
                    upper = upper.max(j - i);
                }
            }
        }
    }
    (lower, upper)
}

pub fn build_operators(grid: SpaceTimeGrid, mode: SchemeMode) -> Result<DiscreteOperators> {
    let n = grid.nx + 1;
    let dx = grid.dx();
    let dt = grid.dt();
    let dminus = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 / dx
        } else if i == j + 1 {
            -1.0 / dx
        } else {
            0.0
        }
    });
    let dplus = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -1.0 / dx
        } else if j == i + 1 {
            1.0 / dx
        } else {
            0.0
        }
    });
    let dc = (&dplus + &dminus) * 0.5;
    let aop = &dplus * &dplus * &dminus + &dc;
    let identity = DMatrix::<f64>::identity(n, n);
    let cop = match mode {
        SchemeMode::PaperLiteral => &aop + &identity * dt,
        SchemeMode::ConsistentEuler => {
            let mut c = &identity + &aop * dt;
            c.row_mut(0).fill(0.0);
            c[(0, 0)] = 1.0;
            for r in [n - 2, n - 1] {
                c.row_mut(r).fill(0.0);
                c[(r, r)] = 1.0;
                c[(r, r - 1)] = -1.0;
            }
            c
        }
    };

    let lu = cop.clone().lu();
    let diag = lu.u().diagonal();
    let (dmin, dmax) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
    let condition = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
    if !(dmin > dmax * f64::EPSILON * n as f64) {
        return Err(Error::Solver {
            reason: "step matrix is singular".into(),
            rows: n,
            cols: n,
            condition,
        });
    }

    Ok(DiscreteOperators {
        grid,
        mode,
        dminus,
        dplus,
        dc,
        aop,
        cop,
        lu,
    })
}

impl DiscreteOperators {
    fn solve(&self, rhs: DVector<f64>) -> DVector<f64> {
        self.lu.solve(&rhs).expect("factorization checked at build time")
    }
}

/// One implicit step from `state`.
///
/// `injection` is added to the right-hand side as given (already multiplied
/// by the mode's scale). In consistent mode `left` is imposed through the
/// boundary rows; in literal mode the caller overwrites afterwards.
/// Nonlinear runs iterate `J(k+1) = C^{-1}(state - s D J(k)^2 / 2 + injection)`
/// from `J(1) = state` for `k = 1..=niter` and return the last iterate; linear
/// runs do a single solve.
pub fn fixed_point_step(
    ops: &DiscreteOperators,
    state: &[f64],
    injection: &[f64],
    left: f64,
    niter: usize,
    nonlinear: bool,
) -> Result<Vec<f64>> {
    let n = ops.grid.nx + 1;
    if state.len() != n || injection.len() != n {
        return Err(Error::Usage(format!(
            "state/injection lengths {}/{} do not match Nx+1 = {n}",
            state.len(),
            injection.len()
        )));
    }
    if niter == 0 {
        return Err(Error::Config("Niter must be at least 1".into()));
    }
    let scale = ops.mode.rhs_scale(ops.grid.dt());
    let base = DVector::from_iterator(n, state.iter().zip(injection).map(|(s, q)| s + q));

    let assemble = |mut rhs: DVector<f64>| {
        if ops.mode == SchemeMode::ConsistentEuler {
            rhs[0] = left;
            rhs[n - 2] = 0.0;
            rhs[n - 1] = 0.0;
        }
        rhs
    };

    if !nonlinear {
        let out = ops.solve(assemble(base));
        return finite_or(out, 1);
    }

    // J(1) is the previous state; each of the niter passes is one solve
    let mut j = DVector::from_column_slice(state);
    for k in 1..=niter {
        let sq = j.map(|v| v * v);
        let rhs = &base - (&ops.dc * sq) * (0.5 * scale);
        j = ops.solve(assemble(rhs));
        if j.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { iterate: k });
        }
    }
    Ok(j.iter().copied().collect())
}

fn finite_or(v: DVector<f64>, iterate: usize) -> Result<Vec<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v.iter().copied().collect())
    } else {
        Err(Error::Diverged { iterate })
    }
}

/// Discrete `u_x(L) = u_xx(L) = 0`: the last two entries take the value of the third-from-last.
pub fn apply_right_boundary(state: &mut [f64]) {
    let n = state.len();
    assert!(n >= 3, "right boundary rule needs at least three samples");
    let v = state[n - 3];
    state[n - 2] = v;
    state[n - 1] = v;
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reference_grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(2.0 * PI, 30, 10.0, 167).unwrap()
    }

    #[test]
    fn dminus_matches_the_displayed_matrix() {
        let g = SpaceTimeGrid::new(3.0, 3, 1.0, 1).unwrap();
        let ops = build_operators(g, SchemeMode::ConsistentEuler).unwrap();
        let dx = g.dx();
        let expected = [
            [1.0, 0.0, 0.0, 0.0],
            [-1.0, 1.0, 0.0, 0.0],
            [0.0, -1.0, 1.0, 0.0],
            [0.0, 0.0, -1.0, 1.0],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(ops.dminus[(i, j)], v / dx);
                assert_eq!(ops.dplus[(j, i)], -v / dx);
            }
        }
        // D- applied to a constant only sees the missing left neighbour
        let out = &ops.dminus * DVector::from_element(4, 2.5);
        assert!((out[0] - 2.5 / dx).abs() < 1e-15);
        assert!(out.iter().skip(1).all(|&v| v == 0.0));
    }

    #[test]
    fn aop_has_one_lower_two_upper_bands() {
        let g = SpaceTimeGrid::new(1.0, 10, 1.0, 10).unwrap();
        let ops = build_operators(g, SchemeMode::PaperLiteral).unwrap();
        assert_eq!(bandwidth(&ops.aop), (1, 2));
        assert_eq!(bandwidth(&ops.dminus), (1, 0));
        assert_eq!(bandwidth(&ops.dplus), (0, 1));
    }

    #[test]
    fn centered_difference_is_exact_on_linears() {
        let g = SpaceTimeGrid::new(2.0, 8, 1.0, 1).unwrap();
        let ops = build_operators(g, SchemeMode::ConsistentEuler).unwrap();
        let x = g.nodes();
        let u = DVector::from_iterator(9, x.iter().map(|x| 0.3 + 1.7 * x));
        let du = &ops.dc * u;
        for v in du.iter().skip(1).take(7) {
            assert!((v - 1.7).abs() < 1e-13);
        }
    }

    #[test]
    fn operator_accuracy_under_refinement() {
        let mut prev: Option<(f64, f64)> = None;
        for nx in [40, 80, 160] {
            let g = SpaceTimeGrid::new(2.0 * PI, nx, 1.0, 1).unwrap();
            let ops = build_operators(g, SchemeMode::ConsistentEuler).unwrap();
            let x = g.nodes();
            let u = DVector::from_iterator(nx + 1, x.iter().map(|x| x.sin()));
            let d1 = &ops.dc * &u;
            let d3 = &ops.dplus * &ops.dplus * &ops.dminus * &u;
            let mut e1: f64 = 0.0;
            let mut e3: f64 = 0.0;
            for j in 2..nx - 2 {
                e1 = e1.max((d1[j] - x[j].cos()).abs());
                e3 = e3.max((d3[j] + x[j].cos()).abs());
            }
            let dx = g.dx();
            assert!(e1 <= 0.2 * dx * dx, "{nx}: {e1}");
            assert!(e3 <= 1.0 * dx, "{nx}: {e3}");
            if let Some((p1, p3)) = prev {
                assert!(p1 / e1 > 3.5);
                assert!(p3 / e3 > 1.8);
            }
            prev = Some((e1, e3));
        }
    }

    #[test]
    fn zero_is_a_fixed_point() {
        for mode in [SchemeMode::PaperLiteral, SchemeMode::ConsistentEuler] {
            let ops = build_operators(reference_grid(), mode).unwrap();
            let z = vec![0.0; 31];
            for niter in [1, 2, 5] {
                let out = fixed_point_step(&ops, &z, &z, 0.0, niter, true).unwrap();
                assert!(out.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn linear_step_ignores_niter() {
        let ops = build_operators(reference_grid(), SchemeMode::ConsistentEuler).unwrap();
        let s: Vec<f64> = reference_grid().nodes().iter().map(|x| x.sin()).collect();
        let q = vec![0.0; 31];
        let a = fixed_point_step(&ops, &s, &q, 0.1, 1, false).unwrap();
        let b = fixed_point_step(&ops, &s, &q, 0.1, 5, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn consistent_step_imposes_boundary_rows() {
        let g = reference_grid();
        let ops = build_operators(g, SchemeMode::ConsistentEuler).unwrap();
        let s: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
        let out = fixed_point_step(&ops, &s, &vec![0.0; 31], 0.25, 5, true).unwrap();
        assert!((out[0] - 0.25).abs() < 1e-14);
        assert!((out[30] - out[29]).abs() < 1e-14);
        assert!((out[29] - out[28]).abs() < 1e-14);
    }

    #[test]
    fn right_boundary_rule() {
        let mut v = [1.0, 2.0, 3.0, 4.0, 5.0];
        apply_right_boundary(&mut v);
        assert_eq!(v, [1.0, 2.0, 3.0, 3.0, 3.0]);
        let mut c = [7.0; 6];
        apply_right_boundary(&mut c);
        assert_eq!(c, [7.0; 6]);
    }

    #[test]
    fn uncontrolled_linear_step_does_not_gain_energy() {
        let g = reference_grid();
        let ops = build_operators(g, SchemeMode::ConsistentEuler).unwrap();
        let dx = g.dx();
        let norm = |u: &[f64]| {
            let s: f64 = u.iter().map(|v| v * v).sum::<f64>() - 0.5 * (u[0] * u[0] + u[30] * u[30]);
            (s * dx).sqrt()
        };
        let mut u: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
        let z = vec![0.0; 31];
        for _ in 0..g.nt {
            let before = norm(&u);
            u = fixed_point_step(&ops, &u, &z, 0.0, 1, false).unwrap();
            apply_right_boundary(&mut u);
            assert!(norm(&u) <= before * (1.0 + 1e-10));
        }
    }
}
