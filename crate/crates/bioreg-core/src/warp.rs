//! Bilinear warping under the pull-back convention.
//!
//! `warp_image(I, u)` evaluates, at each output pixel center `x`, the bilinear
//! interpolant of `I` at the physical position `x + u(x)`. Sample positions
//! outside the image are clamped to the edge (so the sampled value is the
//! nearest edge value and the derivative in the clamped direction is zero).
//! The intensity Jacobian `d(I ∘ u)/du` is the exact derivative of the
//! interpolant and is what the similarity and segmentation losses chain
//! through.

use alloc::vec::Vec;

use crate::error::Error;
use crate::field::DisplacementField2D;
use crate::fmath;
use crate::grid::Grid2D;
use crate::image::{BinaryMask2D, ScalarImage2D};

/// Bilinear sample of `data` (row-major `w x h`) at fractional pixel
/// coordinates, returning `(value, d/dcol, d/drow)`.
///
/// Coordinates are clamped to `[0, w-1] x [0, h-1]`; a clamped axis
/// contributes zero derivative. At exact pixel centers the value is fetched
/// directly so an identity warp is bit-exact.
pub(crate) fn sample_bilinear(
    data: &[f64],
    w: usize,
    h: usize,
    col: f64,
    row: f64,
) -> (f64, f64, f64) {
    let max_c = (w - 1) as f64;
    let max_r = (h - 1) as f64;
    let cc = col.clamp(0.0, max_c);
    let rr = row.clamp(0.0, max_r);
    // NaN coordinates clamp to the lower bound above; they cannot occur for
    // validated displacement fields.
    let col_clamped = cc != col;
    let row_clamped = rr != row;

    // Cell origin: at the far edge fall back to the last cell with a
    // fractional offset of 1, so edge pixels still get a one-sided slope.
    let c0 = (fmath::floor(cc) as usize).min(w - 2);
    let r0 = (fmath::floor(rr) as usize).min(h - 2);
    let fc = cc - c0 as f64;
    let fr = rr - r0 as f64;

    let i00 = r0 * w + c0;
    let v00 = data[i00];
    let v01 = data[i00 + 1];
    let v10 = data[i00 + w];
    let v11 = data[i00 + w + 1];

    let value = if fc == 0.0 && fr == 0.0 {
        v00
    } else {
        let top = (1.0 - fc) * v00 + fc * v01;
        let bot = (1.0 - fc) * v10 + fc * v11;
        (1.0 - fr) * top + fr * bot
    };
    let dcol = if col_clamped {
        0.0
    } else {
        (1.0 - fr) * (v01 - v00) + fr * (v11 - v10)
    };
    let drow = if row_clamped {
        0.0
    } else {
        (1.0 - fc) * (v10 - v00) + fc * (v11 - v01)
    };
    (value, dcol, drow)
}

/// One fused pass over the grid: warped values plus the two intensity
/// Jacobian channels (d value / d u1, d value / d u2, per mm).
pub(crate) fn warp_values_and_jacobian(
    data: &[f64],
    grid: Grid2D,
    u: &DisplacementField2D,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (sx, sy) = grid.spacing;
    let n = grid.len();
    let mut values = Vec::with_capacity(n);
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    let (u1, u2) = (u.u1(), u.u2());
    for row in 0..grid.height {
        for col in 0..grid.width {
            let i = row * grid.width + col;
            let c = col as f64 + u1[i] / sx;
            let r = row as f64 + u2[i] / sy;
            let (v, dc, dr) = sample_bilinear(data, grid.width, grid.height, c, r);
            values.push(v);
            d1.push(dc / sx);
            d2.push(dr / sy);
        }
    }
    (values, d1, d2)
}

fn require_same_grid(grid: Grid2D, u: &DisplacementField2D) -> Result<(), Error> {
    grid.require_matches(&u.grid())
}

/// Warps `moving` by `u`: output pixel `x` takes the bilinear sample of
/// `moving` at `x + u(x)` (mm), clamped to the image extent.
pub fn warp_image(
    moving: &ScalarImage2D,
    u: &DisplacementField2D,
) -> Result<ScalarImage2D, Error> {
    require_same_grid(moving.grid(), u)?;
    let (values, _, _) = warp_values_and_jacobian(moving.data(), moving.grid(), u);
    ScalarImage2D::new(moving.grid(), values)
}

/// Per-pixel derivative of the warped intensity with respect to the local
/// displacement vector, as two images `(d/du1, d/du2)` in intensity per mm.
pub fn warp_intensity_jacobian(
    moving: &ScalarImage2D,
    u: &DisplacementField2D,
) -> Result<(ScalarImage2D, ScalarImage2D), Error> {
    require_same_grid(moving.grid(), u)?;
    let (_, d1, d2) = warp_values_and_jacobian(moving.data(), moving.grid(), u);
    Ok((
        ScalarImage2D::new(moving.grid(), d1)?,
        ScalarImage2D::new(moving.grid(), d2)?,
    ))
}

/// Warps a binary mask with bilinear interpolation, keeping the fractional
/// occupancy in `[0, 1]` (this is the differentiable form the soft-Dice loss
/// uses).
pub fn warp_mask_soft(
    mask: &BinaryMask2D,
    u: &DisplacementField2D,
) -> Result<ScalarImage2D, Error> {
    require_same_grid(mask.grid(), u)?;
    let img = mask.to_image();
    let (values, _, _) = warp_values_and_jacobian(img.data(), img.grid(), u);
    ScalarImage2D::new(mask.grid(), values)
}

/// Warps a binary mask and re-binarizes by thresholding the soft result at
/// 0.5 (values exactly at 0.5 count as foreground).
pub fn warp_mask_hard(
    mask: &BinaryMask2D,
    u: &DisplacementField2D,
) -> Result<BinaryMask2D, Error> {
    let soft = warp_mask_soft(mask, u)?;
    let data = soft.data().iter().map(|&v| u8::from(v >= 0.5)).collect();
    BinaryMask2D::new(mask.grid(), data)
}
