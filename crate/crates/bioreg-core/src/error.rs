//! Crate-wide error type.
//!
//! One enum rather than per-module errors: most operations can surface the
//! same few failure modes (grid mismatches, empty masks), and callers in the
//! CLI map variants onto exit-code categories.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::Grid2D;
use crate::objective::LossTerms;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Grid construction failed (degenerate dimensions or spacing).
    InvalidGrid { reason: &'static str },
    /// Raster payload inconsistent with its grid (length, binary range,
    /// finiteness).
    InvalidData { reason: &'static str },
    /// Two rasters that must share a grid do not.
    GridMismatch { expected: Grid2D, actual: Grid2D },
    /// A mask with no foreground pixels where foreground is required.
    EmptyMask,
    /// Requested crop window exceeds the image extent.
    CropTooLarge {
        requested: (usize, usize),
        available: (usize, usize),
    },
    /// Material parameters outside `E > 0`, `0 <= nu < 0.5`.
    InvalidMaterial { young: f64, poisson: f64 },
    /// Segmentation mask sets whose structure labels do not correspond.
    LabelMismatch { detail: String },
    /// A mask-dependent operation was asked to run without masks.
    MissingMasks,
    /// Statistical test input unusable (too short, mismatched, or zero
    /// variance).
    DegenerateSample { reason: &'static str },
    /// Phantom specification failed validation.
    InvalidSpec { reason: String },
    /// The total loss became NaN/Inf at `iteration`; `history` holds the
    /// per-iteration loss terms recorded up to the failure for diagnosis.
    NonFiniteLoss {
        iteration: usize,
        history: Vec<LossTerms>,
    },
}

impl Error {
    /// Stable machine-readable category name (used by the CLI's one-line
    /// error output).
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidGrid { .. } => "InvalidGrid",
            Error::InvalidData { .. } => "InvalidData",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::EmptyMask => "EmptyMask",
            Error::CropTooLarge { .. } => "CropTooLarge",
            Error::InvalidMaterial { .. } => "InvalidMaterial",
            Error::LabelMismatch { .. } => "LabelMismatch",
            Error::MissingMasks => "MissingMasks",
            Error::DegenerateSample { .. } => "DegenerateSample",
            Error::InvalidSpec { .. } => "InvalidSpec",
            Error::NonFiniteLoss { .. } => "NonFiniteLoss",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid { reason } => write!(f, "invalid grid: {reason}"),
            Error::InvalidData { reason } => write!(f, "invalid raster data: {reason}"),
            Error::GridMismatch { expected, actual } => write!(
                f,
                "grid mismatch: expected {}x{} @ ({}, {}) mm, got {}x{} @ ({}, {}) mm",
                expected.width,
                expected.height,
                expected.spacing.0,
                expected.spacing.1,
                actual.width,
                actual.height,
                actual.spacing.0,
                actual.spacing.1
            ),
            Error::EmptyMask => write!(f, "mask has no foreground pixels"),
            Error::CropTooLarge {
                requested,
                available,
            } => write!(
                f,
                "crop window {}x{} exceeds image extent {}x{}",
                requested.0, requested.1, available.0, available.1
            ),
            Error::InvalidMaterial { young, poisson } => write!(
                f,
                "invalid material: E = {young}, nu = {poisson} (need E > 0 and 0 <= nu < 0.5)"
            ),
            Error::LabelMismatch { detail } => write!(f, "mask-set label mismatch: {detail}"),
            Error::MissingMasks => write!(f, "segmentation masks required but not supplied"),
            Error::DegenerateSample { reason } => write!(f, "degenerate sample: {reason}"),
            Error::InvalidSpec { reason } => write!(f, "invalid phantom spec: {reason}"),
            Error::NonFiniteLoss { iteration, history } => write!(
                f,
                "loss became non-finite at iteration {iteration} ({} history entries recorded)",
                history.len()
            ),
        }
    }
}

impl core::error::Error for Error {}
