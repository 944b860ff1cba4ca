//! Direct per-pair optimization of the displacement field.
//!
//! [`register`] minimizes the objective from [`crate::objective`] with Adam
//! over the two displacement channels, starting from zero (or a supplied
//! initial field). There is no learned component: each image pair is its own
//! optimization problem.
//!
//! The run stops when the total loss changes by less than the (relative)
//! tolerance across a sliding window of iterations, or after
//! `max_iterations` objective evaluations. All loops are sequential with a
//! fixed reduction order, so repeated runs on identical inputs are
//! bit-identical.
//!
//! For large motions an optional two-level coarse-to-fine pyramid solves a
//! 2x-downsampled problem first and upsamples the result (displacements are
//! stored in mm, so values carry over unchanged) as the fine-level start.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::field::DisplacementField2D;
use crate::grid::Grid2D;
use crate::image::{BinaryMask2D, ScalarImage2D, SegMaskSet, SegStructure};
use crate::objective::{total_loss, LossConfig, LossTerms};
use crate::warp::sample_bilinear;

/// Optimizer and stopping configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Adam step size.
    pub learning_rate: f64,
    /// Maximum number of objective evaluations per level.
    pub max_iterations: usize,
    /// Adam first-moment decay.
    pub beta1: f64,
    /// Adam second-moment decay.
    pub beta2: f64,
    /// Adam denominator stabilizer.
    pub epsilon: f64,
    /// Relative loss-change threshold for convergence.
    pub tolerance: f64,
    /// Number of iterations the change is measured across.
    pub window: usize,
    /// Loss weights and options.
    pub loss: LossConfig,
    /// Enable the two-level coarse-to-fine pyramid.
    pub pyramid: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_iterations: 500,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            tolerance: 1e-6,
            window: 10,
            loss: LossConfig::default(),
            pyramid: false,
        }
    }
}

/// Why the iteration loop ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Relative loss change over the window fell below the tolerance.
    Converged,
    /// The evaluation budget ran out.
    MaxIterations,
}

/// Outcome of [`register`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    /// The optimized displacement field (on the input grid).
    pub displacement: DisplacementField2D,
    /// Loss terms of every objective evaluation, in order. With the pyramid
    /// enabled the coarse level's entries come first.
    pub history: Vec<LossTerms>,
    /// Terms of the final evaluation (describing `displacement`).
    pub final_loss: LossTerms,
    /// Total number of objective evaluations across levels.
    pub iterations: usize,
    /// Stop reason of the finest level.
    pub stop_reason: StopReason,
}

/// Adam state for the two displacement channels. Moment buffers are kept in
/// `f64` and bias corrections use running `beta^t` products.
#[derive(Clone, Debug)]
pub struct AdamState {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    beta1_t: f64,
    beta2_t: f64,
    m1: Vec<f64>,
    v1: Vec<f64>,
    m2: Vec<f64>,
    v2: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize, lr: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            epsilon,
            beta1_t: 1.0,
            beta2_t: 1.0,
            m1: vec![0.0; len],
            v1: vec![0.0; len],
            m2: vec![0.0; len],
            v2: vec![0.0; len],
        }
    }

    /// One Adam update of `u` in the descent direction of `grad`.
    pub fn step(&mut self, u: &mut DisplacementField2D, grad: &DisplacementField2D) {
        self.beta1_t *= self.beta1;
        self.beta2_t *= self.beta2;
        let c1 = 1.0 - self.beta1_t;
        let c2 = 1.0 - self.beta2_t;
        let update = |m: &mut [f64], v: &mut [f64], p: &mut [f64], g: &[f64]| {
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= self.lr * m_hat / (crate::fmath::sqrt(v_hat) + self.epsilon);
            }
        };
        update(&mut self.m1, &mut self.v1, u.u1_mut(), grad.u1());
        update(&mut self.m2, &mut self.v2, u.u2_mut(), grad.u2());
    }
}

struct LevelOutcome {
    u: DisplacementField2D,
    history: Vec<LossTerms>,
    stop_reason: StopReason,
}

/// Runs the Adam loop on one resolution level.
fn solve_level(
    moving: &ScalarImage2D,
    fixed: &ScalarImage2D,
    masks: Option<(&SegMaskSet, &SegMaskSet)>,
    cfg: &SolverConfig,
    init: DisplacementField2D,
    history_offset: Vec<LossTerms>,
) -> Result<LevelOutcome, Error> {
    let mut u = init;
    let mut adam = AdamState::new(
        u.grid().len(),
        cfg.learning_rate,
        cfg.beta1,
        cfg.beta2,
        cfg.epsilon,
    );
    let mut history = history_offset;
    let level_start = history.len();
    let mut stop_reason = StopReason::MaxIterations;

    for iteration in 0..cfg.max_iterations {
        let breakdown = total_loss(moving, fixed, masks, &u, &cfg.loss)?;
        if !breakdown.total.is_finite() {
            return Err(Error::NonFiniteLoss {
                iteration: level_start + iteration,
                history,
            });
        }
        history.push(breakdown.terms());

        let evals = history.len() - level_start;
        if evals > cfg.window {
            let prev = history[history.len() - 1 - cfg.window].total;
            let cur = breakdown.total;
            // Plateau test: the loss may rise transiently while the
            // optimizer reorganizes, so only a small absolute change over
            // the window counts as converged.
            let rel = (prev - cur).abs() / prev.abs().max(f64::MIN_POSITIVE);
            if rel < cfg.tolerance {
                stop_reason = StopReason::Converged;
                break;
            }
        }
        if iteration + 1 == cfg.max_iterations {
            break; // budget exhausted; leave u at its last evaluated state
        }
        adam.step(&mut u, &breakdown.grad);
    }

    Ok(LevelOutcome {
        u,
        history,
        stop_reason,
    })
}

/// 2x box-downsample of an image (edge blocks clamp for odd sizes).
fn downsample_image(img: &ScalarImage2D) -> Result<ScalarImage2D, Error> {
    let g = img.grid();
    let cw = g.width.div_ceil(2);
    let ch = g.height.div_ceil(2);
    let coarse = Grid2D::new(cw, ch, (g.spacing.0 * 2.0, g.spacing.1 * 2.0))?;
    Ok(ScalarImage2D::from_fn(coarse, |r, c| {
        block_mean(img.data(), g.width, g.height, r, c)
    }))
}

fn block_mean(data: &[f64], w: usize, h: usize, coarse_row: usize, coarse_col: usize) -> f64 {
    let r0 = coarse_row * 2;
    let c0 = coarse_col * 2;
    let r1 = (r0 + 1).min(h - 1);
    let c1 = (c0 + 1).min(w - 1);
    0.25 * (data[r0 * w + c0] + data[r0 * w + c1] + data[r1 * w + c0] + data[r1 * w + c1])
}

fn downsample_mask_set(set: &SegMaskSet) -> Result<SegMaskSet, Error> {
    let g = set.grid();
    let cw = g.width.div_ceil(2);
    let ch = g.height.div_ceil(2);
    let coarse = Grid2D::new(cw, ch, (g.spacing.0 * 2.0, g.spacing.1 * 2.0))?;
    let structures = set
        .structures()
        .iter()
        .map(|s| {
            let img = s.mask.to_image();
            let mask = BinaryMask2D::from_fn(coarse, |r, c| {
                block_mean(img.data(), g.width, g.height, r, c) >= 0.5
            });
            SegStructure {
                label: s.label.clone(),
                mask,
            }
        })
        .collect();
    SegMaskSet::new(structures)
}

fn downsample_field(u: &DisplacementField2D) -> Result<DisplacementField2D, Error> {
    let g = u.grid();
    let cw = g.width.div_ceil(2);
    let ch = g.height.div_ceil(2);
    let coarse = Grid2D::new(cw, ch, (g.spacing.0 * 2.0, g.spacing.1 * 2.0))?;
    Ok(DisplacementField2D::from_fn(coarse, |r, c| {
        (
            block_mean(u.u1(), g.width, g.height, r, c),
            block_mean(u.u2(), g.width, g.height, r, c),
        )
    }))
}

/// Bilinearly resamples a coarse field onto `fine`; displacement values are
/// mm, so only positions are rescaled.
fn upsample_field(coarse: &DisplacementField2D, fine: Grid2D) -> DisplacementField2D {
    let cg = coarse.grid();
    DisplacementField2D::from_fn(fine, |r, c| {
        let (x1, x2) = fine.position(r, c);
        let col = x1 / cg.spacing.0;
        let row = x2 / cg.spacing.1;
        let (u1, _, _) = sample_bilinear(coarse.u1(), cg.width, cg.height, col, row);
        let (u2, _, _) = sample_bilinear(coarse.u2(), cg.width, cg.height, col, row);
        (u1, u2)
    })
}

/// Estimates the displacement field aligning `moving` to `fixed`.
///
/// `masks` feed the segmentation term when `cfg.loss.gamma > 0`; `init`
/// seeds the field (zero displacement by default).
pub fn register(
    moving: &ScalarImage2D,
    fixed: &ScalarImage2D,
    masks: Option<(&SegMaskSet, &SegMaskSet)>,
    init: Option<&DisplacementField2D>,
    cfg: &SolverConfig,
) -> Result<SolveResult, Error> {
    let grid = moving.grid();
    grid.require_matches(&fixed.grid())?;
    if let Some((mm, mf)) = masks {
        grid.require_matches(&mm.grid())?;
        grid.require_matches(&mf.grid())?;
    }
    let init_fine = match init {
        Some(f) => {
            grid.require_matches(&f.grid())?;
            f.clone()
        }
        None => DisplacementField2D::zeros(grid),
    };

    // Coarse level first when the pyramid is enabled and halving keeps a
    // valid grid.
    let coarse_feasible = grid.width.div_ceil(2) >= 2 && grid.height.div_ceil(2) >= 2;
    let (fine_init, coarse_history) = if cfg.pyramid && coarse_feasible {
        let cm = downsample_image(moving)?;
        let cf = downsample_image(fixed)?;
        let cmasks = match masks {
            Some((a, b)) => Some((downsample_mask_set(a)?, downsample_mask_set(b)?)),
            None => None,
        };
        let cmasks_ref = cmasks.as_ref().map(|(a, b)| (a, b));
        let cinit = downsample_field(&init_fine)?;
        let coarse = solve_level(&cm, &cf, cmasks_ref, cfg, cinit, Vec::new())?;
        (upsample_field(&coarse.u, grid), coarse.history)
    } else {
        (init_fine, Vec::new())
    };

    let outcome = solve_level(moving, fixed, masks, cfg, fine_init, coarse_history)?;
    let final_loss = *outcome
        .history
        .last()
        .expect("at least one objective evaluation");
    Ok(SolveResult {
        displacement: outcome.u,
        iterations: outcome.history.len(),
        history: outcome.history,
        final_loss,
        stop_reason: outcome.stop_reason,
    })
}
