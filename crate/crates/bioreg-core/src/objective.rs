//! The registration objective
//!
//! ```text
//! L(u) = L_sim(u) + lambda * L_reg(u) + gamma * L_seg(u)
//! ```
//!
//! - `L_sim`: mean squared intensity error between the fixed image and the
//!   warped moving image (per-pixel mean, so `lambda`/`gamma` keep their
//!   meaning across image sizes);
//! - `L_reg`: one of the regularizers from [`crate::elasticity`], selected by
//!   [`RegKind`];
//! - `L_seg`: mean over structures of `1 - softDice` between softly warped
//!   moving masks and fixed masks.
//!
//! Every term returns its analytic gradient with respect to both
//! displacement channels; [`finite_difference_gradient`] is the slow central
//! difference oracle the analytic paths are verified against.

use alloc::vec;

use crate::elasticity::{gradient_l2_reg, strain_energy_reg, Material};
use crate::error::Error;
use crate::field::DisplacementField2D;
use crate::image::{ScalarImage2D, SegMaskSet};
use crate::warp::warp_values_and_jacobian;

/// Which field regularizer the objective uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegKind {
    /// Strain-energy penalty with the configured material (the
    /// biomechanics-informed prior).
    Bim,
    /// Plain squared-gradient smoothness baseline.
    L2,
    /// No regularization.
    None,
}

/// Weights and options of the total loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    /// Regularizer weight `lambda`.
    pub lambda: f64,
    /// Segmentation-loss weight `gamma`.
    pub gamma: f64,
    /// Material of the strain-energy regularizer.
    pub material: Material,
    /// Regularizer selection.
    pub regularizer: RegKind,
    /// Additive smoothing of the soft-Dice ratio.
    pub dice_smoothing: f64,
    /// Divide the strain-energy penalty by pixel count (resolution
    /// independence); off by default, matching the plain L2-norm definition.
    pub reg_normalized: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            gamma: 0.01,
            material: Material::default(),
            regularizer: RegKind::Bim,
            dice_smoothing: 1e-6,
            reg_normalized: false,
        }
    }
}

/// The scalar pieces of one loss evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossTerms {
    pub total: f64,
    pub sim: f64,
    pub reg: f64,
    pub seg: f64,
}

/// A full loss evaluation: scalars plus the gradient field.
#[derive(Clone, Debug, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub sim: f64,
    pub reg: f64,
    pub seg: f64,
    pub grad: DisplacementField2D,
}

impl LossBreakdown {
    pub fn terms(&self) -> LossTerms {
        LossTerms {
            total: self.total,
            sim: self.sim,
            reg: self.reg,
            seg: self.seg,
        }
    }
}

/// Mean squared intensity error between `fixed` and `moving` warped by `u`,
/// with its gradient. The warp's intensity Jacobian is diagonal (each output
/// pixel depends only on its own displacement vector), so the chain rule
/// stays per-pixel.
pub fn similarity_loss(
    moving: &ScalarImage2D,
    fixed: &ScalarImage2D,
    u: &DisplacementField2D,
) -> Result<(f64, DisplacementField2D), Error> {
    moving.grid().require_matches(&fixed.grid())?;
    moving.grid().require_matches(&u.grid())?;
    let grid = moving.grid();
    let n = grid.len();
    let (warped, j1, j2) = warp_values_and_jacobian(moving.data(), grid, u);

    let mut value = 0.0;
    let mut g1 = vec![0.0; n];
    let mut g2 = vec![0.0; n];
    let two_over_n = 2.0 / n as f64;
    for i in 0..n {
        let r = warped[i] - fixed.data()[i];
        value += r * r;
        g1[i] = two_over_n * r * j1[i];
        g2[i] = two_over_n * r * j2[i];
    }
    Ok((value / n as f64, DisplacementField2D::from_raw(grid, g1, g2)))
}

/// Mean over structures of `1 - softDice(warp_soft(moving mask), fixed
/// mask)`, with its gradient. Structures are paired by label; sets must
/// cover the same labels.
pub fn segmentation_loss(
    moving_masks: &SegMaskSet,
    fixed_masks: &SegMaskSet,
    u: &DisplacementField2D,
    dice_smoothing: f64,
) -> Result<(f64, DisplacementField2D), Error> {
    moving_masks.grid().require_matches(&fixed_masks.grid())?;
    moving_masks.grid().require_matches(&u.grid())?;
    if moving_masks.len() != fixed_masks.len() {
        return Err(Error::LabelMismatch {
            detail: alloc::format!(
                "moving set has {} structures, fixed set has {}",
                moving_masks.len(),
                fixed_masks.len()
            ),
        });
    }
    let grid = moving_masks.grid();
    let n = grid.len();
    let k = moving_masks.len() as f64;
    let eps = dice_smoothing;

    let mut value = 0.0;
    let mut g1 = vec![0.0; n];
    let mut g2 = vec![0.0; n];
    for structure in moving_masks.structures() {
        let fixed = fixed_masks
            .get(&structure.label)
            .ok_or_else(|| Error::LabelMismatch {
                detail: alloc::format!("label {:?} missing from fixed set", structure.label),
            })?;
        let mask_img = structure.mask.to_image();
        let (p, j1, j2) = warp_values_and_jacobian(mask_img.data(), grid, u);
        let q = fixed.mask.data();

        let mut inter = 0.0;
        let mut sum_p2 = 0.0;
        let mut sum_q2 = 0.0;
        for i in 0..n {
            let qi = f64::from(q[i]);
            inter += p[i] * qi;
            sum_p2 += p[i] * p[i];
            sum_q2 += qi * qi;
        }
        let numer = 2.0 * inter + eps;
        let denom = sum_p2 + sum_q2 + eps;
        value += 1.0 - numer / denom;

        // d(1 - dice)/dp_i = -(2 q_i denom - numer * 2 p_i) / denom^2,
        // then through the soft warp's intensity Jacobian.
        let inv_dd = 1.0 / (denom * denom);
        for i in 0..n {
            let qi = f64::from(q[i]);
            let dldp = -(2.0 * qi * denom - numer * 2.0 * p[i]) * inv_dd / k;
            g1[i] += dldp * j1[i];
            g2[i] += dldp * j2[i];
        }
    }
    Ok((value / k, DisplacementField2D::from_raw(grid, g1, g2)))
}

/// Evaluates the full objective and its gradient.
///
/// When `cfg.gamma > 0` but no masks are supplied the segmentation term is
/// skipped with a warning (`seg = 0`); with `gamma == 0` masks are ignored.
pub fn total_loss(
    moving: &ScalarImage2D,
    fixed: &ScalarImage2D,
    masks: Option<(&SegMaskSet, &SegMaskSet)>,
    u: &DisplacementField2D,
    cfg: &LossConfig,
) -> Result<LossBreakdown, Error> {
    let grid = u.grid();
    let (sim, sim_grad) = similarity_loss(moving, fixed, u)?;

    let (reg, reg_grad) = match cfg.regularizer {
        RegKind::Bim => strain_energy_reg(u, &cfg.material, cfg.reg_normalized),
        RegKind::L2 => gradient_l2_reg(u),
        RegKind::None => (0.0, DisplacementField2D::zeros(grid)),
    };

    let (seg, seg_grad) = if cfg.gamma > 0.0 {
        match masks {
            Some((moving_masks, fixed_masks)) => {
                segmentation_loss(moving_masks, fixed_masks, u, cfg.dice_smoothing)?
            }
            None => {
                log::warn!(
                    "segmentation weight gamma = {} but no masks supplied; using seg = 0",
                    cfg.gamma
                );
                (0.0, DisplacementField2D::zeros(grid))
            }
        }
    } else {
        (0.0, DisplacementField2D::zeros(grid))
    };

    let n = grid.len();
    let mut g1 = sim_grad.u1().to_vec();
    let mut g2 = sim_grad.u2().to_vec();
    for i in 0..n {
        g1[i] += cfg.lambda * reg_grad.u1()[i] + cfg.gamma * seg_grad.u1()[i];
        g2[i] += cfg.lambda * reg_grad.u2()[i] + cfg.gamma * seg_grad.u2()[i];
    }

    Ok(LossBreakdown {
        total: sim + cfg.lambda * reg + cfg.gamma * seg,
        sim,
        reg,
        seg,
        grad: DisplacementField2D::from_raw(grid, g1, g2),
    })
}

/// Central-difference gradient of an arbitrary scalar function of the field:
/// the verification oracle for every analytic gradient in this crate.
/// `h` is the probe step in mm; runtime is `O(pixels^2)`, test sizes only.
pub fn finite_difference_gradient(
    mut f: impl FnMut(&DisplacementField2D) -> f64,
    u: &DisplacementField2D,
    h: f64,
) -> DisplacementField2D {
    assert!(h > 0.0 && h.is_finite(), "finite difference step must be > 0");
    let grid = u.grid();
    let n = grid.len();
    let mut probe = u.clone();
    let mut g1 = vec![0.0; n];
    let mut g2 = vec![0.0; n];
    for (i, slot) in g1.iter_mut().enumerate() {
        let orig = probe.u1()[i];
        probe.u1_mut()[i] = orig + h;
        let fp = f(&probe);
        probe.u1_mut()[i] = orig - h;
        let fm = f(&probe);
        probe.u1_mut()[i] = orig;
        *slot = (fp - fm) / (2.0 * h);
    }
    for (i, slot) in g2.iter_mut().enumerate() {
        let orig = probe.u2()[i];
        probe.u2_mut()[i] = orig + h;
        let fp = f(&probe);
        probe.u2_mut()[i] = orig - h;
        let fm = f(&probe);
        probe.u2_mut()[i] = orig;
        *slot = (fp - fm) / (2.0 * h);
    }
    DisplacementField2D::from_raw(grid, g1, g2)
}
