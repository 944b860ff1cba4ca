//! Finite-difference verification of every analytic gradient.
//!
//! Each suite draws randomized instances (seeded, deterministic), keeps the
//! displacement entries inside (0.1, 0.45) mm so bilinear sample points stay
//! away from cell boundaries and strain energies away from the origin kink,
//! and compares the analytic gradient against central differences of the
//! scalar loss.

use bioreg_core::elasticity::{gradient_l2_reg, strain_energy_reg, Material};
use bioreg_core::objective::{
    finite_difference_gradient, segmentation_loss, similarity_loss, total_loss, LossConfig,
    RegKind,
};
use bioreg_core::{DisplacementField2D, Grid2D, ScalarImage2D, SegMaskSet, SegStructure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZE: usize = 12;
const STEP: f64 = 1e-5;

struct Instance {
    moving: ScalarImage2D,
    fixed: ScalarImage2D,
    u: DisplacementField2D,
    moving_masks: SegMaskSet,
    fixed_masks: SegMaskSet,
}

fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing = (rng.gen_range(0.7..1.3), rng.gen_range(0.7..1.3));
    let grid = Grid2D::new(SIZE, SIZE, spacing).unwrap();
    let image = |rng: &mut ChaCha8Rng| {
        let data = (0..grid.len()).map(|_| rng.gen_range(0.0..2.0)).collect();
        ScalarImage2D::new(grid, data).unwrap()
    };
    let moving = image(&mut rng);
    let fixed = image(&mut rng);
    let u = {
        let channel = |rng: &mut ChaCha8Rng| {
            (0..grid.len()).map(|_| rng.gen_range(0.1..0.45)).collect()
        };
        let u1: Vec<f64> = channel(&mut rng);
        let u2: Vec<f64> = channel(&mut rng);
        DisplacementField2D::new(grid, u1, u2).unwrap()
    };
    let mask_set = |rng: &mut ChaCha8Rng| {
        let rect = |rng: &mut ChaCha8Rng| {
            let r0 = rng.gen_range(0..SIZE / 2);
            let r1 = rng.gen_range(SIZE / 2 + 1..SIZE);
            let c0 = rng.gen_range(0..SIZE / 2);
            let c1 = rng.gen_range(SIZE / 2 + 1..SIZE);
            bioreg_core::BinaryMask2D::from_fn(grid, move |r, c| {
                r >= r0 && r < r1 && c >= c0 && c < c1
            })
        };
        SegMaskSet::new(vec![
            SegStructure {
                label: "inner".into(),
                mask: rect(rng),
            },
            SegStructure {
                label: "outer".into(),
                mask: rect(rng),
            },
        ])
        .unwrap()
    };
    let moving_masks = mask_set(&mut rng);
    let fixed_masks = mask_set(&mut rng);
    Instance {
        moving,
        fixed,
        u,
        moving_masks,
        fixed_masks,
    }
}

/// `max |analytic - numeric| / max ||numeric||_inf`.
fn relative_error(analytic: &DisplacementField2D, numeric: &DisplacementField2D) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (a, n) in [
        (analytic.u1(), numeric.u1()),
        (analytic.u2(), numeric.u2()),
    ] {
        for i in 0..a.len() {
            worst = worst.max((a[i] - n[i]).abs());
            scale = scale.max(n[i].abs());
        }
    }
    worst / scale.max(1e-12)
}

#[test]
fn similarity_gradient_matches_finite_differences() {
    for seed in 0..20 {
        let inst = instance(seed);
        let (_, analytic) = similarity_loss(&inst.moving, &inst.fixed, &inst.u).unwrap();
        let numeric = finite_difference_gradient(
            |u| similarity_loss(&inst.moving, &inst.fixed, u).unwrap().0,
            &inst.u,
            STEP,
        );
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-6, "seed {seed}: relative error {err:.3e}");
    }
}

#[test]
fn strain_energy_gradient_matches_finite_differences() {
    for seed in 0..20 {
        let inst = instance(seed);
        let material = Material::new(1.0 + (seed as f64) * 0.1, 0.3 + (seed as f64) * 0.005)
            .unwrap();
        let normalized = seed % 2 == 1;
        let (_, analytic) = strain_energy_reg(&inst.u, &material, normalized);
        let numeric = finite_difference_gradient(
            |u| strain_energy_reg(u, &material, normalized).0,
            &inst.u,
            STEP,
        );
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-6, "seed {seed}: relative error {err:.3e}");
    }
}

#[test]
fn gradient_magnitude_penalty_matches_finite_differences() {
    for seed in 0..20 {
        let inst = instance(seed);
        let (_, analytic) = gradient_l2_reg(&inst.u);
        let numeric = finite_difference_gradient(|u| gradient_l2_reg(u).0, &inst.u, STEP);
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-8, "seed {seed}: relative error {err:.3e}");
    }
}

#[test]
fn segmentation_gradient_matches_finite_differences() {
    for seed in 0..20 {
        let inst = instance(seed);
        let (_, analytic) =
            segmentation_loss(&inst.moving_masks, &inst.fixed_masks, &inst.u, 1e-6).unwrap();
        let numeric = finite_difference_gradient(
            |u| {
                segmentation_loss(&inst.moving_masks, &inst.fixed_masks, u, 1e-6)
                    .unwrap()
                    .0
            },
            &inst.u,
            STEP,
        );
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-5, "seed {seed}: relative error {err:.3e}");
    }
}

#[test]
fn total_loss_gradient_matches_finite_differences() {
    for seed in 0..20 {
        let inst = instance(seed);
        let cfg = LossConfig {
            lambda: 0.05,
            gamma: 0.01,
            regularizer: if seed % 2 == 0 {
                RegKind::Bim
            } else {
                RegKind::L2
            },
            ..LossConfig::default()
        };
        let masks = Some((&inst.moving_masks, &inst.fixed_masks));
        let breakdown = total_loss(&inst.moving, &inst.fixed, masks, &inst.u, &cfg).unwrap();
        let numeric = finite_difference_gradient(
            |u| {
                total_loss(&inst.moving, &inst.fixed, masks, u, &cfg)
                    .unwrap()
                    .total
            },
            &inst.u,
            STEP,
        );
        let err = relative_error(&breakdown.grad, &numeric);
        assert!(err < 1e-5, "seed {seed}: relative error {err:.3e}");
    }
}
