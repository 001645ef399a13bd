//! Least-squares spectral collocation for third-order kernel equations on the
//! triangle `{0 <= x <= y <= L}`.
//!
//! The unknown is written as `K(x, y) = f(x, y) * sum c_ab P_a(x) P_b(y)` with
//! Legendre factors scaled to `[0, L]` and a vanishing factor `f` that makes
//! the homogeneous Dirichlet conditions hold exactly. The remaining
//! conditions
//!
//! ```text
//! K_xxx + K_yyy + K_x + K_y + c K = g(x, y)     interior
//! K_x(s, s)                       = slope(s)    diagonal
//! K(s, L) + K_yy(s, L)            = edge(s)     top edge (optional)
//! ```
//!
//! are collocated and solved in the least-squares sense by SVD.

use nalgebra::{DMatrix, DVector};

use super::legendre::{gauss_nodes_unit, scaled_legendre, MAX_DERIV};
use crate::error::{Error, Result};

/// Relative weight of boundary rows against interior rows.
const BOUNDARY_WEIGHT: f64 = 10.0;

/// Which homogeneous Dirichlet conditions are built into the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vanishing {
    /// `K(s, s) = 0`.
    Diagonal,
    /// `K(s, s) = 0` and `K(s, L) = 0`.
    DiagonalAndTop,
}

impl Vanishing {
    /// `d^p/dx^p d^q/dy^q f(x, y)`.
    fn derivative(self, p: usize, q: usize, x: f64, y: f64, len: f64) -> f64 {
        match self {
            Vanishing::Diagonal => match (p, q) {
                (0, 0) => y - x,
                (1, 0) => -1.0,
                (0, 1) => 1.0,
                _ => 0.0,
            },
            Vanishing::DiagonalAndTop => match (p, q) {
                (0, 0) => (y - x) * (len - y),
                (1, 0) => -(len - y),
                (0, 1) => len - 2.0 * y + x,
                (1, 1) => 1.0,
                (0, 2) => -2.0,
                _ => 0.0,
            },
        }
    }
}

pub struct CollocationProblem<'a> {
    pub length: f64,
    /// Coefficient `c` of the zeroth-order term.
    pub reaction: f64,
    pub forcing: &'a dyn Fn(f64, f64) -> f64,
    pub diag_slope: &'a dyn Fn(f64) -> f64,
    pub vanishing: Vanishing,
    /// Right-hand side of `K + K_yy = edge` on `y = L`; `None` drops those rows.
    pub edge: Option<&'a dyn Fn(f64) -> f64>,
}

/// Solved kernel in closed form.
#[derive(Debug, Clone)]
pub struct PolynomialKernel {
    length: f64,
    degree: usize,
    vanishing: Vanishing,
    coeffs: Vec<f64>,
    /// Ratio of extreme singular values of the column-scaled system.
    pub condition: f64,
    /// Singular values kept by the truncated solve.
    pub rank: usize,
}

fn basis_indices(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree)
        .flat_map(|a| (0..=degree - a).map(move |b| (a, b)))
        .collect()
}

fn binom(n: usize, k: usize) -> f64 {
    match (n, k) {
        (_, 0) => 1.0,
        (n, k) if k == n => 1.0,
        (2, 1) => 2.0,
        (3, 1) | (3, 2) => 3.0,
        _ => unreachable!("derivative order above {MAX_DERIV}"),
    }
}

/// Evaluation context for one point: Legendre tables in x and y.
struct PointBasis {
    fx: [Vec<f64>; MAX_DERIV + 1],
    fy: [Vec<f64>; MAX_DERIV + 1],
    x: f64,
    y: f64,
}

impl PointBasis {
    fn new(degree: usize, x: f64, y: f64, len: f64) -> Self {
        Self {
            fx: scaled_legendre(degree, x, len),
            fy: scaled_legendre(degree, y, len),
            x,
            y,
        }
    }

    /// Row of `d^p_x d^q_y phi_ab` over the basis.
    fn row(&self, basis: &[(usize, usize)], vanishing: Vanishing, len: f64, p: usize, q: usize) -> Vec<f64> {
        let mut factors = [[0.0; MAX_DERIV + 1]; MAX_DERIV + 1];
        for (i, row) in factors.iter_mut().enumerate().take(p + 1) {
            for (j, v) in row.iter_mut().enumerate().take(q + 1) {
                *v = binom(p, i) * binom(q, j) * vanishing.derivative(i, j, self.x, self.y, len);
            }
        }
        basis
            .iter()
            .map(|&(a, b)| {
                let mut acc = 0.0;
                for (i, row) in factors.iter().enumerate().take(p + 1) {
                    for (j, &f) in row.iter().enumerate().take(q + 1) {
                        if f != 0.0 {
                            acc += f * self.fx[p - i][a] * self.fy[q - j][b];
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

impl PolynomialKernel {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `d^p/dx^p d^q/dy^q K(x, y)`, `p, q <= 3`.
    pub fn eval(&self, x: f64, y: f64, p: usize, q: usize) -> f64 {
        let basis = basis_indices(self.degree);
        let pt = PointBasis::new(self.degree, x, y, self.length);
        pt.row(&basis, self.vanishing, self.length, p, q)
            .iter()
            .zip(&self.coeffs)
            .map(|(r, c)| r * c)
            .sum()
    }

    /// `K_xxx + K_yyy + K_x + K_y + c K` at a point.
    pub fn operator(&self, x: f64, y: f64, reaction: f64) -> f64 {
        self.eval(x, y, 3, 0)
            + self.eval(x, y, 0, 3)
            + self.eval(x, y, 1, 0)
            + self.eval(x, y, 0, 1)
            + reaction * self.eval(x, y, 0, 0)
    }
}

/// Collocation points strictly inside the triangle: tensor Gauss nodes pushed
/// through `x = u L`, `y = x + (L - x) v`.
pub fn interior_points(count_per_axis: usize, len: f64) -> Vec<(f64, f64)> {
    let g = gauss_nodes_unit(count_per_axis);
    let mut pts = Vec::with_capacity(g.len() * g.len());
    for &u in &g {
        for &v in &g {
            let x = u * len;
            pts.push((x, x + (len - x) * v));
        }
    }
    pts
}

pub fn boundary_points(count: usize, len: f64) -> Vec<f64> {
    (0..count)
        .map(|k| len * k as f64 / (count - 1) as f64)
        .collect()
}

pub fn solve(problem: &CollocationProblem<'_>, degree: usize) -> Result<PolynomialKernel> {
    let len = problem.length;
    let basis = basis_indices(degree);
    let n = basis.len();

    let interior = interior_points(degree + 8, len);
    let edge_pts = boundary_points(3 * degree + 4, len);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();

    for &(x, y) in &interior {
        let pt = PointBasis::new(degree, x, y, len);
        let v = problem.vanishing;
        let mut row = pt.row(&basis, v, len, 3, 0);
        for (p, q, w) in [(0, 3, 1.0), (1, 0, 1.0), (0, 1, 1.0), (0, 0, problem.reaction)] {
            if w == 0.0 {
                continue;
            }
            for (r, t) in row.iter_mut().zip(pt.row(&basis, v, len, p, q)) {
                *r += w * t;
            }
        }
        rows.push(row);
        rhs.push((problem.forcing)(x, y));
    }
    for &s in &edge_pts {
        let pt = PointBasis::new(degree, s, s, len);
        let row = pt.row(&basis, problem.vanishing, len, 1, 0);
        rows.push(row.into_iter().map(|r| BOUNDARY_WEIGHT * r).collect());
        rhs.push(BOUNDARY_WEIGHT * (problem.diag_slope)(s));
    }
    if let Some(edge) = problem.edge {
        for &s in &edge_pts {
            let pt = PointBasis::new(degree, s, len, len);
            let mut row = pt.row(&basis, problem.vanishing, len, 0, 0);
            for (r, t) in row.iter_mut().zip(pt.row(&basis, problem.vanishing, len, 0, 2)) {
                *r += t;
            }
            rows.push(row.into_iter().map(|r| BOUNDARY_WEIGHT * r).collect());
            rhs.push(BOUNDARY_WEIGHT * edge(s));
        }
    }

    let m = rows.len();
    // unit column norms, then truncated SVD with the usual relative cutoff;
    // a few near-null directions are normal for high degrees and are what the
    // truncation regularizes away
    let mut scale = vec![0.0; n];
    for row in &rows {
        for (s, v) in scale.iter_mut().zip(row) {
            *s += v * v;
        }
    }
    for s in scale.iter_mut() {
        *s = if *s > 0.0 { 1.0 / s.sqrt() } else { 1.0 };
    }
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j] * scale[j]);
    let b = DVector::from_vec(rhs);

    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cutoff = smax * f64::EPSILON * m.max(n) as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(smax.is_finite() && smax > 0.0) || 2 * rank < n {
        return Err(Error::Solver {
            reason: format!("collocation matrix has numerical rank {rank} of {n}"),
            rows: m,
            cols: n,
            condition,
        });
    }
    let x = svd.solve(&b, cutoff).map_err(|e| Error::Solver {
        reason: e.to_string(),
        rows: m,
        cols: n,
        condition,
    })?;

    Ok(PolynomialKernel {
        length: len,
        degree,
        vanishing: problem.vanishing,
        coeffs: x.iter().zip(&scale).map(|(c, s)| c * s).collect(),
        condition,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Manufactured solution `K = (y - x) exp((x + y)/4)`; every derivative is
    /// elementary, so the data below is computed by hand.
    #[test]
    fn recovers_manufactured_kernel() {
        let len = 2.0;
        let c = 1.5;
        let e = |x: f64, y: f64| ((x + y) / 4.0).exp();
        let exact = |x: f64, y: f64| (y - x) * e(x, y);
        // K_xxx = -3E/16 + (y-x)E/64, K_yyy = 3E/16 + (y-x)E/64,
        // K_x = -E + (y-x)E/4, K_y = E + (y-x)E/4
        let forcing = move |x: f64, y: f64| (y - x) * e(x, y) * (1.0 / 32.0 + 0.5 + c);
        let slope = move |s: f64| -e(s, s);
        // K + K_yy with K_yy = E/2 + (y-x)E/16
        let edge = move |s: f64| e(s, len) * ((len - s) + 0.5 + (len - s) / 16.0);
        let problem = CollocationProblem {
            length: len,
            reaction: c,
            forcing: &forcing,
            diag_slope: &slope,
            vanishing: Vanishing::Diagonal,
            edge: Some(&edge),
        };
        let k = solve(&problem, 12).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=10 {
            for j in i..=10 {
                let (x, y) = (len * i as f64 / 10.0, len * j as f64 / 10.0);
                worst = worst.max((k.eval(x, y, 0, 0) - exact(x, y)).abs());
            }
        }
        assert!(worst < 1e-9, "max error {worst}");
        // derivative evaluation agrees with the hand formula as well
        let (x, y) = (0.3, 1.7);
        let kyy = e(x, y) * (0.5 + (y - x) / 16.0);
        assert!((k.eval(x, y, 0, 2) - kyy).abs() < 1e-7);
    }

    #[test]
    fn top_vanishing_factor_is_exact() {
        let len = 1.0;
        let zero = |_: f64, _: f64| 0.0;
        let slope = |s: f64| 0.4 * (len - s);
        let problem = CollocationProblem {
            length: len,
            reaction: 1.0,
            forcing: &zero,
            diag_slope: &slope,
            vanishing: Vanishing::DiagonalAndTop,
            edge: None,
        };
        let k = solve(&problem, 10).unwrap();
        for s in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(k.eval(s, s, 0, 0), 0.0);
            assert_eq!(k.eval(s, len, 0, 0), 0.0);
        }
    }
}
