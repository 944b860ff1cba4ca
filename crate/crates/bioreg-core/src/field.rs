//! Dense 2D displacement fields.
//!
//! A field stores per-pixel displacement vectors `(u1, u2)` in millimetres on
//! the fixed image's grid. The pull-back convention applies everywhere: the
//! warped moving image at pixel position `x` samples the moving image at
//! `x + u(x)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::fmath;
use crate::grid::Grid2D;

#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementField2D {
    grid: Grid2D,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl DisplacementField2D {
    /// Wraps the two channels (`u1` along `x1`, `u2` along `x2`, row-major,
    /// mm). All entries must be finite.
    pub fn new(grid: Grid2D, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self, Error> {
        if u1.len() != grid.len() || u2.len() != grid.len() {
            return Err(Error::InvalidData {
                reason: "displacement channel length does not equal width * height",
            });
        }
        if u1.iter().chain(u2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData {
                reason: "displacement entries must be finite",
            });
        }
        Ok(Self { grid, u1, u2 })
    }

    /// Internal constructor for freshly computed buffers (no finite scan).
    pub(crate) fn from_raw(grid: Grid2D, u1: Vec<f64>, u2: Vec<f64>) -> Self {
        debug_assert_eq!(u1.len(), grid.len());
        debug_assert_eq!(u2.len(), grid.len());
        Self { grid, u1, u2 }
    }

    /// Identity transform (all-zero displacement).
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            u1: vec![0.0; grid.len()],
            u2: vec![0.0; grid.len()],
        }
    }

    /// Builds a field by evaluating `f(row, col) -> (u1, u2)` at every pixel.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(usize, usize) -> (f64, f64)) -> Self {
        let mut u1 = Vec::with_capacity(grid.len());
        let mut u2 = Vec::with_capacity(grid.len());
        for row in 0..grid.height {
            for col in 0..grid.width {
                let (a, b) = f(row, col);
                u1.push(a);
                u2.push(b);
            }
        }
        Self { grid, u1, u2 }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    /// Horizontal (`x1`) displacement channel, row-major, mm.
    #[inline]
    pub fn u1(&self) -> &[f64] {
        &self.u1
    }

    /// Vertical (`x2`) displacement channel, row-major, mm.
    #[inline]
    pub fn u2(&self) -> &[f64] {
        &self.u2
    }

    #[inline]
    pub fn u1_mut(&mut self) -> &mut [f64] {
        &mut self.u1
    }

    #[inline]
    pub fn u2_mut(&mut self) -> &mut [f64] {
        &mut self.u2
    }

    /// Displacement vector at pixel `(row, col)`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> (f64, f64) {
        let i = self.grid.idx(row, col);
        (self.u1[i], self.u2[i])
    }

    /// The field scaled by `s` (used e.g. for homogeneity checks).
    pub fn scaled(&self, s: f64) -> DisplacementField2D {
        DisplacementField2D {
            grid: self.grid,
            u1: self.u1.iter().map(|&v| v * s).collect(),
            u2: self.u2.iter().map(|&v| v * s).collect(),
        }
    }

    /// Mean Euclidean magnitude `mean |u|` over all pixels, in mm.
    pub fn mean_magnitude(&self) -> f64 {
        let sum: f64 = self
            .u1
            .iter()
            .zip(&self.u2)
            .map(|(&a, &b)| fmath::hypot(a, b))
            .sum();
        sum / self.grid.len() as f64
    }

    /// Largest Euclidean magnitude `max |u|` over all pixels, in mm.
    pub fn max_magnitude(&self) -> f64 {
        self.u1
            .iter()
            .zip(&self.u2)
            .map(|(&a, &b)| fmath::hypot(a, b))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_entries() {
        let g = Grid2D::new(2, 2, (1.0, 1.0)).unwrap();
        let err = DisplacementField2D::new(g, vec![0.0, f64::NAN, 0.0, 0.0], vec![0.0; 4]);
        assert!(err.is_err());
        let err = DisplacementField2D::new(g, vec![0.0; 4], vec![f64::INFINITY, 0.0, 0.0, 0.0]);
        assert!(err.is_err());
    }

    #[test]
    fn magnitudes() {
        let g = Grid2D::new(2, 2, (1.0, 1.0)).unwrap();
        let f = DisplacementField2D::new(g, vec![3.0, 0.0, 0.0, 0.0], vec![4.0, 0.0, 0.0, 0.0])
            .unwrap();
        assert_eq!(f.max_magnitude(), 5.0);
        assert_eq!(f.mean_magnitude(), 1.25);
        assert_eq!(f.scaled(2.0).max_magnitude(), 10.0);
    }
}
