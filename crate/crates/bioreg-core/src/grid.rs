//! Raster grid geometry shared by images, masks, and displacement fields.
//!
//! Convention used throughout the crate:
//!
//! - pixel `(i, j)` is row `i` (top to bottom), column `j` (left to right);
//! - data buffers are row-major, so the flat index is `i * width + j`;
//! - the physical position of pixel center `(i, j)` is
//!   `(x1, x2) = (j * spacing_x, i * spacing_y)` in millimetres, with `x1`
//!   horizontal and `x2` vertical;
//! - displacement values are stored in millimetres, not pixels.

use crate::error::Error;

/// Dimensions and pixel spacing of a raster; two rasters are compatible for
/// elementwise operations iff their `Grid2D`s compare equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    /// Number of columns.
    pub width: usize,
    /// Number of rows.
    pub height: usize,
    /// Pixel spacing `(sx, sy)` in mm per pixel along `x1` and `x2`.
    pub spacing: (f64, f64),
}

impl Grid2D {
    /// Validates `width, height >= 2` and strictly positive, finite spacing.
    pub fn new(width: usize, height: usize, spacing: (f64, f64)) -> Result<Self, Error> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidGrid {
                reason: "grid needs at least 2 pixels along each axis",
            });
        }
        if !(spacing.0.is_finite() && spacing.0 > 0.0 && spacing.1.is_finite() && spacing.1 > 0.0) {
            return Err(Error::InvalidGrid {
                reason: "pixel spacing must be finite and > 0",
            });
        }
        Ok(Self {
            width,
            height,
            spacing,
        })
    }

    /// Total pixel count `width * height`.
    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // by construction width, height >= 2
    }

    /// Flat row-major index of pixel `(row, col)`.
    #[inline]
    pub fn idx(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    /// Physical position `(x1, x2)` in mm of the center of pixel `(row, col)`.
    #[inline]
    pub fn position(&self, row: usize, col: usize) -> (f64, f64) {
        (col as f64 * self.spacing.0, row as f64 * self.spacing.1)
    }

    /// Checks that `self` and `other` agree, for ops that pair two rasters.
    pub fn require_matches(&self, other: &Grid2D) -> Result<(), Error> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: *self,
                actual: *other,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid2D::new(1, 4, (1.0, 1.0)).is_err());
        assert!(Grid2D::new(4, 0, (1.0, 1.0)).is_err());
        assert!(Grid2D::new(4, 4, (0.0, 1.0)).is_err());
        assert!(Grid2D::new(4, 4, (1.0, -2.0)).is_err());
        assert!(Grid2D::new(4, 4, (1.0, f64::NAN)).is_err());
        assert!(Grid2D::new(2, 2, (0.5, 2.0)).is_ok());
    }

    #[test]
    fn position_is_column_major_x1_row_major_x2() {
        // Pixel (row 2, col 3) with unit spacing sits at (x1, x2) = (3, 2).
        let g = Grid2D::new(8, 8, (1.0, 1.0)).unwrap();
        assert_eq!(g.position(2, 3), (3.0, 2.0));
        // Anisotropic spacing scales each axis independently.
        let g = Grid2D::new(8, 8, (0.5, 2.0)).unwrap();
        assert_eq!(g.position(2, 3), (1.5, 4.0));
    }

    #[test]
    fn mismatch_reports_both_grids() {
        let a = Grid2D::new(4, 4, (1.0, 1.0)).unwrap();
        let b = Grid2D::new(4, 5, (1.0, 1.0)).unwrap();
        let err = a.require_matches(&b).unwrap_err();
        match err {
            Error::GridMismatch { expected, actual } => {
                assert_eq!(expected, a);
                assert_eq!(actual, b);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
