//! Legendre polynomials on a scaled interval and Gauss-Legendre nodes.

use std::f64::consts::PI;

/// Highest derivative order the kernel equations need.
pub const MAX_DERIV: usize = 3;

/// Values and derivatives `d^k/dz^k P_n(2z/len - 1)` for `n <= degree`, `k <= MAX_DERIV`.
///
/// Indexing is `table[k][n]`.
pub fn scaled_legendre(degree: usize, z: f64, len: f64) -> [Vec<f64>; MAX_DERIV + 1] {
    let t = 2.0 * z / len - 1.0;
    let mut table: [Vec<f64>; MAX_DERIV + 1] = std::array::from_fn(|_| vec![0.0; degree + 1]);
    table[0][0] = 1.0;
    if degree >= 1 {
        table[0][1] = t;
        table[1][1] = 1.0;
    }
    // P_{n+1} = ((2n+1) t P_n - n P_{n-1}) / (n+1)
    // P^{(k)}_{n+1} = P^{(k)}_{n-1} + (2n+1) P^{(k-1)}_n
    for n in 1..degree {
        let nf = n as f64;
        table[0][n + 1] = ((2.0 * nf + 1.0) * t * table[0][n] - nf * table[0][n - 1]) / (nf + 1.0);
        for k in 1..=MAX_DERIV {
            table[k][n + 1] = table[k][n - 1] + (2.0 * nf + 1.0) * table[k - 1][n];
        }
    }
    let scale = 2.0 / len;
    let mut factor = 1.0;
    for row in table.iter_mut().skip(1) {
        factor *= scale;
        for v in row.iter_mut() {
            *v *= factor;
        }
    }
    table
}

/// Gauss-Legendre nodes on `[0, 1]`, ascending.
pub fn gauss_nodes_unit(n: usize) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        // Newton on P_n from the Chebyshev-like initial guess.
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, t);
            let step = p / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes.push((1.0 - t) / 2.0);
    }
    nodes.sort_by(|a, b| a.total_cmp(b));
    nodes
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_closed_forms() {
        let len = 3.0;
        let z = 0.7;
        let t = 2.0 * z / len - 1.0;
        let tab = scaled_legendre(4, z, len);
        let p3 = 0.5 * (5.0 * t.powi(3) - 3.0 * t);
        let p4 = (35.0 * t.powi(4) - 30.0 * t * t + 3.0) / 8.0;
        assert!((tab[0][3] - p3).abs() < 1e-14);
        assert!((tab[0][4] - p4).abs() < 1e-14);
        let s = 2.0 / len;
        // P4' = (140 t^3 - 60 t)/8, P4''' = 840 t / 8
        assert!((tab[1][4] - s * (140.0 * t.powi(3) - 60.0 * t) / 8.0).abs() < 1e-13);
        assert!((tab[3][4] - s.powi(3) * 105.0 * t).abs() < 1e-12);
        assert!((tab[2][3] - s * s * 15.0 * t).abs() < 1e-13);
    }

    #[test]
    fn gauss_nodes_integrate_polynomials() {
        // Degree 2n-1 exactness via the standard weights is not needed here;
        // just check symmetry and the known three-point nodes.
        let nodes = gauss_nodes_unit(3);
        let r = (0.6f64).sqrt();
        let expected = [(1.0 - r) / 2.0, 0.5, (1.0 + r) / 2.0];
        for (a, b) in nodes.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let many = gauss_nodes_unit(17);
        for (a, b) in many.iter().zip(many.iter().rev()) {
            assert!((a + b - 1.0).abs() < 1e-14);
        }
    }
}
