//! Scalar images, binary masks, and labelled mask sets on a common grid,
//! plus the small preprocessing ops: min-max normalization, mask centroids,
//! and centered cropping.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::fmath;
use crate::grid::Grid2D;

/// A single-channel `f64` image. Row-major storage; see [`Grid2D`] for the
/// index and physical-coordinate conventions.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarImage2D {
    grid: Grid2D,
    data: Vec<f64>,
}

impl ScalarImage2D {
    /// Wraps `data` (row-major, length `grid.len()`).
    pub fn new(grid: Grid2D, data: Vec<f64>) -> Result<Self, Error> {
        if data.len() != grid.len() {
            return Err(Error::InvalidData {
                reason: "image data length does not equal width * height",
            });
        }
        Ok(Self { grid, data })
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for row in 0..grid.height {
            for col in 0..grid.width {
                data.push(f(row, col));
            }
        }
        Self { grid, data }
    }

    /// All-zero image on `grid`.
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.grid.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.grid.height
    }

    /// Pixel spacing `(sx, sy)` in mm.
    #[inline]
    pub fn spacing(&self) -> (f64, f64) {
        self.grid.spacing
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[self.grid.idx(row, col)]
    }

    /// Affinely rescales intensities to `[0, 1]`. A constant image maps to
    /// all zeros; NaN entries propagate through the arithmetic untouched.
    pub fn normalize_minmax(&self) -> ScalarImage2D {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi == lo {
            return ScalarImage2D::zeros(self.grid);
        }
        let scale = hi - lo;
        let data = self.data.iter().map(|&v| (v - lo) / scale).collect();
        ScalarImage2D {
            grid: self.grid,
            data,
        }
    }

    /// Extracts a `size = (width, height)` window whose center pixel lies
    /// nearest to the physical point `center_mm = (x1, x2)`; the window is
    /// shifted (never padded) to stay inside the image, and ties round toward
    /// the smaller index. Spacing is preserved.
    pub fn crop_centered(
        &self,
        center_mm: (f64, f64),
        size: (usize, usize),
    ) -> Result<ScalarImage2D, Error> {
        let (out_w, out_h) = size;
        if out_w > self.grid.width || out_h > self.grid.height {
            return Err(Error::CropTooLarge {
                requested: size,
                available: (self.grid.width, self.grid.height),
            });
        }
        let out_grid = Grid2D::new(out_w, out_h, self.grid.spacing)?;

        // Window start so that its center pixel index (fractional for even
        // sizes) is nearest the requested center; ceil(x - 0.5) rounds halves
        // down.
        let start = |center_px: f64, len: usize, max_start: usize| -> usize {
            let ideal = center_px - (len as f64 - 1.0) / 2.0;
            let snapped = fmath::ceil(ideal - 0.5);
            let snapped = snapped.clamp(0.0, max_start as f64);
            snapped as usize
        };
        let col0 = start(
            center_mm.0 / self.grid.spacing.0,
            out_w,
            self.grid.width - out_w,
        );
        let row0 = start(
            center_mm.1 / self.grid.spacing.1,
            out_h,
            self.grid.height - out_h,
        );

        let mut data = Vec::with_capacity(out_grid.len());
        for row in 0..out_h {
            let src = self.grid.idx(row0 + row, col0);
            data.extend_from_slice(&self.data[src..src + out_w]);
        }
        Ok(ScalarImage2D {
            grid: out_grid,
            data,
        })
    }
}

/// A binary raster (`0`/`1` per pixel) on the same grid conventions as
/// [`ScalarImage2D`].
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMask2D {
    grid: Grid2D,
    data: Vec<u8>,
}

impl BinaryMask2D {
    /// Wraps `data`; every entry must be 0 or 1.
    pub fn new(grid: Grid2D, data: Vec<u8>) -> Result<Self, Error> {
        if data.len() != grid.len() {
            return Err(Error::InvalidData {
                reason: "mask data length does not equal width * height",
            });
        }
        if data.iter().any(|&v| v > 1) {
            return Err(Error::InvalidData {
                reason: "mask entries must be 0 or 1",
            });
        }
        Ok(Self { grid, data })
    }

    /// Builds a mask by evaluating a predicate at every pixel.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for row in 0..grid.height {
            for col in 0..grid.width {
                data.push(u8::from(f(row, col)));
            }
        }
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[self.grid.idx(row, col)] != 0
    }

    /// Number of foreground pixels.
    pub fn foreground_count(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    /// Mean physical position `(x1, x2)` in mm of the foreground pixels.
    /// Errors with [`Error::EmptyMask`] when there is no foreground.
    pub fn centroid(&self) -> Result<(f64, f64), Error> {
        let mut n = 0usize;
        let mut sum = (0.0f64, 0.0f64);
        for row in 0..self.grid.height {
            for col in 0..self.grid.width {
                if self.get(row, col) {
                    let (x1, x2) = self.grid.position(row, col);
                    sum.0 += x1;
                    sum.1 += x2;
                    n += 1;
                }
            }
        }
        if n == 0 {
            return Err(Error::EmptyMask);
        }
        Ok((sum.0 / n as f64, sum.1 / n as f64))
    }

    /// The mask as a 0.0/1.0 scalar image (for interpolation-based ops).
    pub fn to_image(&self) -> ScalarImage2D {
        ScalarImage2D {
            grid: self.grid,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }
}

/// One labelled structure of a segmentation.
#[derive(Clone, Debug, PartialEq)]
pub struct SegStructure {
    pub label: String,
    pub mask: BinaryMask2D,
}

/// A set of labelled binary masks sharing one grid (e.g. myocardium and
/// cavity of the same frame).
#[derive(Clone, Debug, PartialEq)]
pub struct SegMaskSet {
    grid: Grid2D,
    structures: Vec<SegStructure>,
}

impl SegMaskSet {
    /// Validates that at least one structure is present, all masks share a
    /// grid, and labels are distinct.
    pub fn new(structures: Vec<SegStructure>) -> Result<Self, Error> {
        let first = structures.first().ok_or(Error::InvalidData {
            reason: "a mask set needs at least one structure",
        })?;
        let grid = first.mask.grid();
        for s in &structures {
            grid.require_matches(&s.mask.grid())?;
        }
        for (i, a) in structures.iter().enumerate() {
            if structures[i + 1..].iter().any(|b| a.label == b.label) {
                return Err(Error::LabelMismatch {
                    detail: alloc::format!("duplicate structure label {:?}", a.label),
                });
            }
        }
        Ok(Self { grid, structures })
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn structures(&self) -> &[SegStructure] {
        &self.structures
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.structures.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // by construction at least one structure
    }

    /// Looks up a structure by label.
    pub fn get(&self, label: &str) -> Option<&SegStructure> {
        self.structures.iter().find(|s| s.label == label)
    }
}
