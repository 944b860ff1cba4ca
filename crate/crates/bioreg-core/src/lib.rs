//! Dense 2D deformable image registration with a biomechanics-informed prior.
//!
//! The crate estimates a dense displacement field `u` that aligns a moving
//! image to a fixed image by directly minimizing
//!
//! ```text
//! L(u) = L_sim(u) + lambda * L_reg(u) + gamma * L_seg(u)
//! ```
//!
//! where `L_sim` is mean-squared intensity error under bilinear warping,
//! `L_reg` penalizes linear-elastic strain energy of the field (an isotropic
//! plane-stress material), and `L_seg` optionally rewards soft-Dice overlap of
//! warped segmentation masks. All gradients are analytic; optimization is
//! plain Adam over the two displacement channels.
//!
//! Pipeline stages, one module each:
//!
//! - [`image`]: scalar images, binary masks, mask sets, and grid geometry
//! - [`field`]: dense displacement fields (mm units, pull-back convention)
//! - [`warp`]: bilinear warping of images and masks plus its intensity Jacobian
//! - [`elasticity`]: strain tensors, plane-stress stiffness, strain-energy
//!   density, and the two regularizers
//! - [`objective`]: loss terms, total loss with analytic gradient, and a
//!   finite-difference gradient oracle
//! - [`solver`]: Adam-based registration with an optional 2-level pyramid
//! - [`metrics`]: Dice/Jaccard, surface distances, Jacobian-determinant
//!   statistics, and a paired t-test
//! - [`phantom`]: an analytic contracting-annulus pair with ground truth
//!
//! The crate is `no_std`-compatible (with `alloc`): disable the default `std`
//! feature and enable `libm` instead. File formats and the CLI live in the
//! companion crate `bioreg-cli`.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("bioreg-core requires either the `std` or the `libm` feature");

extern crate alloc;

mod error;
mod fmath;
mod stencil;

pub mod elasticity;
pub mod field;
pub mod grid;
pub mod image;
pub mod metrics;
pub mod objective;
pub mod phantom;
pub mod solver;
pub mod warp;

pub use error::Error;
pub use field::DisplacementField2D;
pub use grid::Grid2D;
pub use image::{BinaryMask2D, ScalarImage2D, SegMaskSet, SegStructure};
