//! Prints end-to-end phantom/solver diagnostics used to pick the default
//! phantom constants. Run with:
//!   cargo run -p bioreg-core --example diag --release

use bioreg_core::metrics::{dice, jacobian_determinant_map, JacobianStats};
use bioreg_core::objective::{LossConfig, RegKind};
use bioreg_core::phantom::{endpoint_error, make_pair, NoiseSpec, PhantomSpec, CAVITY};
use bioreg_core::solver::{register, SolverConfig};
use bioreg_core::warp::warp_mask_hard;

fn warp_err(pair: &bioreg_core::phantom::PhantomPair) -> (f64, f64) {
    let warped = bioreg_core::warp::warp_image(&pair.moving, &pair.ground_truth).unwrap();
    let max = pair
        .fixed
        .data()
        .iter()
        .fold(f64::MIN, |a, &v| a.max(v));
    let min = pair
        .fixed
        .data()
        .iter()
        .fold(f64::MAX, |a, &v| a.min(v));
    let range = max - min;
    let mut worst = 0.0f64;
    for i in 0..pair.fixed.data().len() {
        if pair.roi.data()[i] == 1 {
            worst = worst.max((warped.data()[i] - pair.fixed.data()[i]).abs());
        }
    }
    (worst, range)
}

fn cavity_dice(pair: &bioreg_core::phantom::PhantomPair, u: &bioreg_core::DisplacementField2D) -> f64 {
    let warped = warp_hard(pair, u);
    dice(&warped, &pair.fixed_masks.get(CAVITY).unwrap().mask).unwrap()
}

fn warp_hard(
    pair: &bioreg_core::phantom::PhantomPair,
    u: &bioreg_core::DisplacementField2D,
) -> bioreg_core::BinaryMask2D {
    warp_mask_hard(&pair.moving_masks.get(CAVITY).unwrap().mask, u).unwrap()
}

fn main() {
    let spec = PhantomSpec::default();
    let pair = make_pair(&spec).unwrap();
    let (worst, range) = warp_err(&pair);
    println!(
        "warp-consistency: max err {:.5} | threshold {:.5} | ratio {:.2}",
        worst,
        0.02 * range,
        worst / (0.02 * range)
    );
    let unreg = dice(
        &pair.moving_masks.get(CAVITY).unwrap().mask,
        &pair.fixed_masks.get(CAVITY).unwrap().mask,
    )
    .unwrap();
    println!("unregistered cavity dice: {unreg:.4}");

    let t0 = std::time::Instant::now();
    let cfg = SolverConfig {
        loss: LossConfig {
            gamma: 0.0,
            ..LossConfig::default()
        },
        ..SolverConfig::default()
    };
    let res = register(&pair.moving, &pair.fixed, None, None, &cfg).unwrap();
    let (mean, max) = endpoint_error(&res.displacement, &pair.ground_truth, &pair.roi).unwrap();
    println!(
        "default solve: iters {} ({:?}) in {:.2?} | EPE mean {:.3} max {:.3} | dice {:.4} | mean|u| {:.3} (gt-roi)",
        res.iterations,
        res.stop_reason,
        t0.elapsed(),
        mean,
        max,
        cavity_dice(&pair, &res.displacement),
        res.displacement.mean_magnitude(),
    );

    // Lambda sweep on the clean phantom.
    for lambda in [0.005, 0.05, 0.5] {
        let cfg = SolverConfig {
            loss: LossConfig {
                lambda,
                gamma: 0.0,
                ..LossConfig::default()
            },
            ..SolverConfig::default()
        };
        let res = register(&pair.moving, &pair.fixed, None, None, &cfg).unwrap();
        let (mean, max) = endpoint_error(&res.displacement, &pair.ground_truth, &pair.roi).unwrap();
        println!(
            "lambda {:>5}: mean|u| {:.4} | EPE mean {:.3} max {:.3} | dice {:.4} | iters {}",
            lambda,
            res.displacement.mean_magnitude(),
            mean,
            max,
            cavity_dice(&pair, &res.displacement),
            res.iterations
        );
    }

    // Poisson-ratio sweep.
    for nu in [0.35, 0.4, 0.45] {
        let cfg = SolverConfig {
            loss: LossConfig {
                gamma: 0.0,
                material: bioreg_core::elasticity::Material::new(1.0, nu).unwrap(),
                ..LossConfig::default()
            },
            ..SolverConfig::default()
        };
        let res = register(&pair.moving, &pair.fixed, None, None, &cfg).unwrap();
        println!(
            "nu {nu}: dice {:.4}",
            cavity_dice(&pair, &res.displacement)
        );
    }

    // Noisy phantom: regularization quality comparison.
    let noisy_spec = PhantomSpec {
        noise: Some(NoiseSpec {
            sigma: 0.01 * range,
            seed: 20260823,
        }),
        ..PhantomSpec::default()
    };
    let noisy = make_pair(&noisy_spec).unwrap();
    for (name, lambda, reg) in [
        ("bim 0.05", 0.05, RegKind::Bim),
        ("none    ", 0.0, RegKind::None),
    ] {
        let cfg = SolverConfig {
            loss: LossConfig {
                lambda,
                gamma: 0.0,
                regularizer: reg,
                ..LossConfig::default()
            },
            ..SolverConfig::default()
        };
        let res = register(&noisy.moving, &noisy.fixed, None, None, &cfg).unwrap();
        let stats = JacobianStats::from_map(&jacobian_determinant_map(&res.displacement));
        let (mean, max) = endpoint_error(&res.displacement, &noisy.ground_truth, &noisy.roi).unwrap();
        println!(
            "noisy {name}: |detJ-1| {} | EPE mean {:.3} max {:.3} | dice {:.4}",
            stats.formatted(),
            mean,
            max,
            cavity_dice(&noisy, &res.displacement)
        );
    }

    // Segmentation-term effect on the noisy phantom.
    for gamma in [0.0, 0.01] {
        let cfg = SolverConfig {
            loss: LossConfig {
                gamma,
                ..LossConfig::default()
            },
            ..SolverConfig::default()
        };
        let res = register(
            &noisy.moving,
            &noisy.fixed,
            Some((&noisy.moving_masks, &noisy.fixed_masks)),
            None,
            &cfg,
        )
        .unwrap();
        println!(
            "noisy gamma {gamma}: dice {:.4}",
            cavity_dice(&noisy, &res.displacement)
        );
    }
}
