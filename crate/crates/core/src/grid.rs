//! Uniform periodic boxes.

use crate::error::{Error, Result};

/// A periodic rectangular box sampled at `dims` equispaced points per axis.
///
/// Point `j` along axis `a` sits at `origin[a] + j * lengths[a] / dims[a]`;
/// the right endpoint is the periodic image of the origin and is not stored.
/// Two-dimensional problems use `dims[2] == 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dims: [usize; 3],
    lengths: [f64; 3],
    origin: [f64; 3],
}

impl Grid {
    pub fn new(dims: [usize; 3], lengths: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        for a in 0..3 {
            if dims[a] == 0 {
                return Err(Error::InvalidArgument(format!(
                    "grid dimension {} must be positive",
                    a + 1
                )));
            }
            if !(lengths[a].is_finite() && lengths[a] > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "grid length {} must be positive and finite",
                    a + 1
                )));
            }
            if !origin[a].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "grid origin {} must be finite",
                    a + 1
                )));
            }
        }
        Ok(Grid {
            dims,
            lengths,
            origin,
        })
    }

    /// `n^3` points on `[0, 2π]^3`.
    pub fn periodic_cube(n: usize) -> Result<Self> {
        let l = 2.0 * std::f64::consts::PI;
        Grid::new([n, n, n], [l; 3], [0.0; 3])
    }

    /// `n x n x 1` points on `[-1, 1]^2`, uniform along the third axis.
    pub fn unit_square_2d(n: usize) -> Result<Self> {
        Grid::new([n, n, 1], [2.0, 2.0, 1.0], [-1.0, -1.0, 0.0])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn domain_volume(&self) -> f64 {
        self.lengths[0] * self.lengths[1] * self.lengths[2]
    }

    /// Quadrature weight of one grid point.
    pub fn cell_volume(&self) -> f64 {
        self.domain_volume() / self.len() as f64
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.dims[axis] as f64
    }

    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        self.origin[axis] + j as f64 * self.spacing(axis)
    }

    /// Linear index, first axis fastest.
    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        i1 + self.dims[0] * (i2 + self.dims[1] * i3)
    }

    #[inline]
    pub fn multi_index(&self, index: usize) -> [usize; 3] {
        let i1 = index % self.dims[0];
        let rest = index / self.dims[0];
        [i1, rest % self.dims[1], rest / self.dims[1]]
    }

    pub fn point(&self, index: usize) -> [f64; 3] {
        let [i1, i2, i3] = self.multi_index(index);
        [
            self.coordinate(0, i1),
            self.coordinate(1, i2),
            self.coordinate(2, i3),
        ]
    }

    /// Grid points in storage order.
    pub fn points(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn storage_order_is_first_axis_fastest() {
        let g = Grid::new([3, 4, 5], [1.0, 1.0, 1.0], [0.0; 3]).unwrap();
        assert_eq!(g.index(1, 0, 0), 1);
        assert_eq!(g.index(0, 1, 0), 3);
        assert_eq!(g.index(0, 0, 1), 12);
        for i in 0..g.len() {
            let [a, b, c] = g.multi_index(i);
            assert_eq!(g.index(a, b, c), i);
        }
    }

    #[test]
    fn right_endpoint_excluded() {
        let g = Grid::unit_square_2d(40).unwrap();
        assert_eq!(g.coordinate(0, 0), -1.0);
        assert!((g.coordinate(0, 39) - (1.0 - 0.05)).abs() < 1e-15);
        assert!((g.cell_volume() - 4.0 / 1600.0).abs() < 1e-18);
    }

    #[test]
    fn rejects_degenerate_boxes() {
        assert!(Grid::new([0, 1, 1], [1.0; 3], [0.0; 3]).is_err());
        assert!(Grid::new([1, 1, 1], [1.0, -1.0, 1.0], [0.0; 3]).is_err());
        assert!(Grid::new([1, 1, 1], [1.0; 3], [f64::NAN, 0.0, 0.0]).is_err());
    }
}
