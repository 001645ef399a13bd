use crate::error::{Error, Result};

/// Smallest number of subdivisions per side accepted for a kernel grid.
pub const MIN_SUBDIVISIONS: usize = 8;

/// Uniform nodes `(x_i, y_j) = (i h, j h)`, `0 <= i <= j <= M`, on the triangle
/// `{0 <= x <= L, x <= y <= L}`.
///
/// Node storage is row-major in `i`, then `j >= i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGrid {
    length: f64,
    subdivisions: usize,
}

impl TriangleGrid {
    pub fn new(length: f64, subdivisions: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Config(format!(
                "triangle side length must be positive, got {length}"
            )));
        }
        if subdivisions < MIN_SUBDIVISIONS {
            return Err(Error::Config(format!(
                "kernel grid needs at least {MIN_SUBDIVISIONS} subdivisions, got {subdivisions}"
            )));
        }
        Ok(Self {
            length,
            subdivisions,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `M`.
    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.subdivisions as f64
    }

    pub fn node_count(&self) -> usize {
        let m = self.subdivisions;
        (m + 1) * (m + 2) / 2
    }

    pub fn coord(&self, index: usize) -> f64 {
        // Exact at both ends.
        if index == self.subdivisions {
            self.length
        } else {
            index as f64 * self.spacing()
        }
    }

    /// Flat storage offset of node `(i, j)`; requires `i <= j <= M`.
    pub fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j <= self.subdivisions);
        let m = self.subdivisions;
        // rows 0..i contribute (M+1) + M + ... + (M+2-i) nodes
        i * (2 * m + 3 - i) / 2 + (j - i)
    }

    /// All node index pairs in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.subdivisions;
        (0..=m).flat_map(move |i| (i..=m).map(move |j| (i, j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reference_resolution() {
        let g = TriangleGrid::new(2.0 * PI, 30).unwrap();
        assert_eq!(g.node_count(), 496);
        assert!((g.spacing() - 0.20943951023931953).abs() < 1e-15);
    }

    #[test]
    fn unit_square_side() {
        let g = TriangleGrid::new(1.0, 8).unwrap();
        assert_eq!(g.node_count(), 45);
        assert_eq!(g.spacing(), 0.125);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(TriangleGrid::new(1.0, 4), Err(Error::Config(_))));
        assert!(matches!(TriangleGrid::new(0.0, 10), Err(Error::Config(_))));
        assert!(matches!(TriangleGrid::new(-1.0, 10), Err(Error::Config(_))));
    }

    #[test]
    fn offsets_follow_storage_order() {
        let g = TriangleGrid::new(1.0, 11).unwrap();
        for (k, (i, j)) in g.nodes().enumerate() {
            assert!(j >= i);
            assert!(g.coord(j) >= g.coord(i));
            assert_eq!(g.offset(i, j), k);
        }
        assert_eq!(g.nodes().count(), g.node_count());
    }
}
