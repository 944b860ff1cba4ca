//! Synthetic contracting-annulus phantom with exact ground truth.
//!
//! The phantom models a short-axis cardiac slice: a bright muscle ring
//! ("myocardium") around a darker pool ("cavity") on a dark background. The
//! moving frame shows the relaxed geometry; the fixed frame shows the same
//! tissue contracted by a fraction `c` about a slightly shifted center (real
//! hearts translate as they contract, and the shift keeps the unregistered
//! baseline honestly imperfect). Both frames are rendered analytically from
//! one continuous radial profile, so the ground-truth displacement field is
//! exact rather than rasterized.
//!
//! With the pull-back convention `moved(x) = moving(x + u(x))`, the
//! ground-truth field maps each fixed-grid point to its preimage: a point at
//! radius `rho` from the contracted center came from radius `rho/(1-c)`, so
//! `u_gt(x) = (c/(1-c)) * (x - center_f) - t` where `t` is the center shift.
//! The field is feathered to zero well outside the ring so the border stays
//! put; the evaluation ROI excludes that feathered far field.
//!
//! A faint radial texture covers the whole frame (including the otherwise
//! flat pool and background) so that image evidence exists everywhere — an
//! unregularized solver will visibly overfit noise there, which is exactly
//! the failure mode the regularizer comparisons need to expose.

use core::f64::consts::PI;

use alloc::string::String;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::Error;
use crate::field::DisplacementField2D;
use crate::fmath;
use crate::grid::Grid2D;
use crate::image::{BinaryMask2D, ScalarImage2D, SegMaskSet, SegStructure};

/// Additive Gaussian pixel noise, applied independently to both frames.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation in intensity units.
    pub sigma: f64,
    /// RNG seed; the same seed reproduces the phantom bit-exactly.
    pub seed: u64,
}

/// Geometry, intensity profile, and deformation of the phantom.
#[derive(Clone, Debug, PartialEq)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    /// Pixel spacing in mm.
    pub spacing: (f64, f64),
    /// Annulus center in the relaxed frame, physical mm.
    pub center: (f64, f64),
    /// Inner (cavity) radius, mm.
    pub inner_radius: f64,
    /// Outer (epicardial) radius, mm.
    pub outer_radius: f64,
    /// Contraction fraction `c`: contracted radii are `(1-c)` times the
    /// relaxed radii. Zero means the two frames are identical.
    pub contraction: f64,
    /// Width of the smooth intensity transition at each radius, mm. Keeping
    /// this a few pixels wide bounds the bilinear interpolation error that
    /// the render-and-warp consistency check measures.
    pub edge_width: f64,
    pub background_level: f64,
    pub ring_level: f64,
    pub pool_level: f64,
    /// Amplitude of the global radial cosine texture.
    pub texture_amplitude: f64,
    /// Period of the texture, mm.
    pub texture_period: f64,
    /// Center shift per unit contraction, mm; the contracted center is
    /// `center + c * drift_per_contraction`.
    pub drift_per_contraction: (f64, f64),
    /// Radius where the ground-truth field starts feathering to zero, mm.
    pub taper_start: f64,
    /// Width of the feathering band, mm.
    pub taper_width: f64,
    pub noise: Option<NoiseSpec>,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            width: 96,
            height: 96,
            spacing: (1.0, 1.0),
            center: (47.5, 47.5),
            inner_radius: 12.0,
            outer_radius: 24.0,
            contraction: 0.05,
            edge_width: 7.0,
            background_level: 0.5,
            ring_level: 4.3,
            pool_level: 2.4,
            texture_amplitude: 0.25,
            texture_period: 10.0,
            drift_per_contraction: (40.0, 30.0),
            taper_start: 32.0,
            taper_width: 10.0,
            noise: None,
        }
    }
}

impl PhantomSpec {
    /// Default spec with the given contraction fraction.
    pub fn with_contraction(c: f64) -> Self {
        Self {
            contraction: c,
            ..Self::default()
        }
    }

    pub fn grid(&self) -> Result<Grid2D, Error> {
        Grid2D::new(self.width, self.height, self.spacing)
    }

    fn validate(&self) -> Result<Grid2D, Error> {
        let grid = self.grid()?;
        let extent = (self.width as f64 * self.spacing.0).min(self.height as f64 * self.spacing.1);
        let reject = |reason: &str| -> Error {
            Error::InvalidSpec {
                reason: String::from(reason),
            }
        };
        if !(self.inner_radius > 0.0 && self.inner_radius < self.outer_radius) {
            return Err(reject("radii must satisfy 0 < inner < outer"));
        }
        if self.outer_radius >= 0.5 * extent {
            return Err(reject("outer radius must be below half the grid extent"));
        }
        if !(0.0..=0.3).contains(&self.contraction) {
            return Err(reject("contraction must lie in [0, 0.3]"));
        }
        // NaN fails `positive` and is rejected like any other bad value.
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.edge_width) || !positive(self.texture_period) {
            return Err(reject("edge width and texture period must be positive"));
        }
        if self.texture_amplitude < 0.0 {
            return Err(reject("texture amplitude must be non-negative"));
        }
        let taper_start_ok = self.taper_start >= self.outer_radius; // NaN fails
        if !taper_start_ok || !positive(self.taper_width) {
            return Err(reject(
                "taper must start at or beyond the outer radius with positive width",
            ));
        }
        let finite = [
            self.center.0,
            self.center.1,
            self.background_level,
            self.ring_level,
            self.pool_level,
            self.drift_per_contraction.0,
            self.drift_per_contraction.1,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(reject("levels, center, and drift must be finite"));
        }
        if let Some(noise) = &self.noise {
            if !noise.sigma.is_finite() || noise.sigma < 0.0 {
                return Err(reject("noise sigma must be finite and non-negative"));
            }
        }
        Ok(grid)
    }

    /// Continuous radial intensity profile of the relaxed frame.
    fn profile(&self, r: f64) -> f64 {
        let s_inner = edge_step(r, self.inner_radius, self.edge_width);
        let s_outer = edge_step(r, self.outer_radius, self.edge_width);
        self.pool_level
            + (self.ring_level - self.pool_level) * s_inner
            + (self.background_level - self.ring_level) * s_outer
            + self.texture_amplitude * fmath::cos(2.0 * PI * r / self.texture_period)
    }

    fn contracted_center(&self) -> (f64, f64) {
        (
            self.center.0 + self.contraction * self.drift_per_contraction.0,
            self.center.1 + self.contraction * self.drift_per_contraction.1,
        )
    }
}

/// Smooth 0→1 ramp of the given width centered on `edge`.
fn edge_step(r: f64, edge: f64, width: f64) -> f64 {
    smoothstep01((r - edge) / width + 0.5)
}

fn smoothstep01(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z >= 1.0 {
        1.0
    } else {
        z * z * (3.0 - 2.0 * z)
    }
}

/// A rendered phantom case: two frames, their masks, the exact displacement
/// field, and the evaluation region.
#[derive(Clone, Debug, PartialEq)]
pub struct PhantomPair {
    /// Relaxed frame (registration source).
    pub moving: ScalarImage2D,
    /// Contracted frame (registration target).
    pub fixed: ScalarImage2D,
    pub moving_masks: SegMaskSet,
    pub fixed_masks: SegMaskSet,
    /// Exact displacement sampled on the fixed grid (pull-back convention).
    pub ground_truth: DisplacementField2D,
    /// Band around the ring where ground truth is untapered and errors are
    /// evaluated.
    pub roi: BinaryMask2D,
}

/// Label of the ring structure.
pub const MYOCARDIUM: &str = "myocardium";
/// Label of the enclosed pool structure.
pub const CAVITY: &str = "cavity";

fn annulus_masks(
    grid: Grid2D,
    center: (f64, f64),
    inner: f64,
    outer: f64,
) -> Result<SegMaskSet, Error> {
    let dist = |r: usize, c: usize| {
        let (x1, x2) = grid.position(r, c);
        fmath::hypot(x1 - center.0, x2 - center.1)
    };
    let ring = BinaryMask2D::from_fn(grid, |r, c| {
        let d = dist(r, c);
        d > inner && d <= outer
    });
    let pool = BinaryMask2D::from_fn(grid, |r, c| dist(r, c) <= inner);
    SegMaskSet::new(alloc::vec![
        SegStructure {
            label: String::from(MYOCARDIUM),
            mask: ring,
        },
        SegStructure {
            label: String::from(CAVITY),
            mask: pool,
        },
    ])
}

fn add_noise(image: &mut ScalarImage2D, sigma: f64, rng: &mut ChaCha8Rng) {
    // Box-Muller on uniform draws from the counter-based stream.
    let data = image.data_mut();
    let mut i = 0;
    while i < data.len() {
        let u1 = unit_f64(rng);
        let u2 = unit_f64(rng);
        let radius = fmath::sqrt(-2.0 * fmath::ln(1.0 - u1));
        let angle = 2.0 * PI * u2;
        data[i] += sigma * radius * fmath::cos(angle);
        if i + 1 < data.len() {
            data[i + 1] += sigma * radius * fmath::sin(angle);
        }
        i += 2;
    }
}

/// Uniform draw in [0, 1) with 53-bit resolution.
fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Renders a phantom pair from the spec. Deterministic: the same spec
/// (including any noise seed) yields bit-identical output.
pub fn make_pair(spec: &PhantomSpec) -> Result<PhantomPair, Error> {
    let grid = spec.validate()?;
    let c = spec.contraction;
    let scale = 1.0 - c;
    let alpha = c / scale;
    let center_m = spec.center;
    let center_f = spec.contracted_center();
    let shift = (center_f.0 - center_m.0, center_f.1 - center_m.1);

    let mut moving = ScalarImage2D::from_fn(grid, |r, col| {
        let (x1, x2) = grid.position(r, col);
        spec.profile(fmath::hypot(x1 - center_m.0, x2 - center_m.1))
    });
    let mut fixed = ScalarImage2D::from_fn(grid, |r, col| {
        let (x1, x2) = grid.position(r, col);
        spec.profile(fmath::hypot(x1 - center_f.0, x2 - center_f.1) / scale)
    });
    if let Some(noise) = &spec.noise {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        add_noise(&mut moving, noise.sigma, &mut rng);
        add_noise(&mut fixed, noise.sigma, &mut rng);
    }

    let ground_truth = DisplacementField2D::from_fn(grid, |r, col| {
        let (x1, x2) = grid.position(r, col);
        let d1 = x1 - center_f.0;
        let d2 = x2 - center_f.1;
        let rho = fmath::hypot(d1, d2);
        let taper = 1.0 - smoothstep01((rho - spec.taper_start) / spec.taper_width);
        (
            taper * (alpha * d1 - shift.0),
            taper * (alpha * d2 - shift.1),
        )
    });

    let roi = BinaryMask2D::from_fn(grid, |r, col| {
        let (x1, x2) = grid.position(r, col);
        let rho = fmath::hypot(x1 - center_f.0, x2 - center_f.1);
        rho >= scale * spec.inner_radius && rho <= spec.outer_radius
    });

    Ok(PhantomPair {
        moving,
        fixed,
        moving_masks: annulus_masks(grid, center_m, spec.inner_radius, spec.outer_radius)?,
        fixed_masks: annulus_masks(
            grid,
            center_f,
            scale * spec.inner_radius,
            scale * spec.outer_radius,
        )?,
        ground_truth,
        roi,
    })
}

/// Mean and maximum Euclidean displacement error (mm) over the ROI.
pub fn endpoint_error(
    estimate: &DisplacementField2D,
    truth: &DisplacementField2D,
    roi: &BinaryMask2D,
) -> Result<(f64, f64), Error> {
    estimate.grid().require_matches(&truth.grid())?;
    estimate.grid().require_matches(&roi.grid())?;
    let mut sum = 0.0;
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for i in 0..estimate.grid().len() {
        if roi.data()[i] == 0 {
            continue;
        }
        let e = fmath::hypot(
            estimate.u1()[i] - truth.u1()[i],
            estimate.u2()[i] - truth.u2()[i],
        );
        sum += e;
        if e > worst {
            worst = e;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok((sum / count as f64, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{dice, jacobian_determinant_map};
    use crate::warp::warp_image;

    #[test]
    fn zero_contraction_is_an_exact_fixed_point() {
        let spec = PhantomSpec::with_contraction(0.0);
        let pair = make_pair(&spec).unwrap();
        assert_eq!(pair.moving, pair.fixed);
        assert_eq!(pair.ground_truth.max_magnitude(), 0.0);
        for (m, f) in pair
            .moving_masks
            .structures()
            .iter()
            .zip(pair.fixed_masks.structures())
        {
            assert_eq!(m.mask, f.mask);
        }
    }

    #[test]
    fn warping_the_moving_frame_reproduces_the_fixed_frame_on_the_roi() {
        let pair = make_pair(&PhantomSpec::default()).unwrap();
        let warped = warp_image(&pair.moving, &pair.ground_truth).unwrap();
        let range = pair
            .fixed
            .data()
            .iter()
            .fold(f64::MIN, |a, &v| a.max(v))
            - pair.fixed.data().iter().fold(f64::MAX, |a, &v| a.min(v));
        let mut worst = 0.0f64;
        for i in 0..pair.fixed.data().len() {
            if pair.roi.data()[i] == 1 {
                worst = worst.max((warped.data()[i] - pair.fixed.data()[i]).abs());
            }
        }
        assert!(
            worst < 0.02 * range,
            "max reproduction error {worst:.5} vs 2% of range = {:.5}",
            0.02 * range
        );
    }

    #[test]
    fn ground_truth_jacobian_reflects_the_preimage_expansion() {
        // The pull-back field maps fixed points to their relaxed-frame
        // preimages, which span a larger area: det = 1/(1-c)^2 > 1 in the
        // untapered region. Exact because the field is affine there.
        let spec = PhantomSpec::default();
        let pair = make_pair(&spec).unwrap();
        let det = jacobian_determinant_map(&pair.ground_truth);
        let expected = 1.0 / ((1.0 - spec.contraction) * (1.0 - spec.contraction));
        for i in 0..det.data().len() {
            if pair.roi.data()[i] == 1 {
                assert!((det.data()[i] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contracted_masks_differ_and_leave_headroom_for_registration() {
        let pair = make_pair(&PhantomSpec::default()).unwrap();
        let d = dice(
            &pair.moving_masks.get(CAVITY).unwrap().mask,
            &pair.fixed_masks.get(CAVITY).unwrap().mask,
        )
        .unwrap();
        assert!(d < 1.0);
        // The center shift plus shrinkage put the unregistered overlap
        // clearly below 0.9 while staying a plausible starting point.
        assert!(d < 0.90, "unregistered cavity dice {d:.4}");
        assert!(d > 0.75, "unregistered cavity dice {d:.4}");
    }

    #[test]
    fn endpoint_error_examples() {
        let pair = make_pair(&PhantomSpec::default()).unwrap();
        let gt = &pair.ground_truth;
        let (mean, max) = endpoint_error(gt, gt, &pair.roi).unwrap();
        assert_eq!((mean, max), (0.0, 0.0));

        // Against a zero field the error is the mean ground-truth magnitude.
        let zero = DisplacementField2D::zeros(gt.grid());
        let (mean, _) = endpoint_error(&zero, gt, &pair.roi).unwrap();
        let mut expected = 0.0;
        let mut n = 0;
        for i in 0..gt.grid().len() {
            if pair.roi.data()[i] == 1 {
                expected += fmath::hypot(gt.u1()[i], gt.u2()[i]);
                n += 1;
            }
        }
        assert!((mean - expected / n as f64).abs() < 1e-12);

        // A constant 0.3 mm offset shows up exactly.
        let offset = DisplacementField2D::from_fn(gt.grid(), |r, c| {
            let (u1, u2) = gt.get(r, c);
            (u1 + 0.3, u2)
        });
        let (mean, max) = endpoint_error(&offset, gt, &pair.roi).unwrap();
        assert!((mean - 0.3).abs() < 1e-12);
        assert!((max - 0.3).abs() < 1e-12);
    }

    #[test]
    fn noise_is_seeded_and_deterministic() {
        let mut spec = PhantomSpec {
            noise: Some(NoiseSpec {
                sigma: 0.01,
                seed: 7,
            }),
            ..PhantomSpec::default()
        };
        let a = make_pair(&spec).unwrap();
        let b = make_pair(&spec).unwrap();
        assert_eq!(a.moving, b.moving);
        assert_eq!(a.fixed, b.fixed);

        spec.noise = Some(NoiseSpec {
            sigma: 0.01,
            seed: 8,
        });
        let c = make_pair(&spec).unwrap();
        assert_ne!(a.moving, c.moving);

        let clean = make_pair(&PhantomSpec::default()).unwrap();
        let max_dev = a
            .moving
            .data()
            .iter()
            .zip(clean.moving.data())
            .fold(0.0f64, |w, (x, y)| w.max((x - y).abs()));
        assert!(max_dev > 0.0 && max_dev < 0.06);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = |mutate: fn(&mut PhantomSpec)| {
            let mut spec = PhantomSpec::default();
            mutate(&mut spec);
            assert!(
                matches!(make_pair(&spec), Err(Error::InvalidSpec { .. })),
                "spec should be invalid: {spec:?}"
            );
        };
        bad(|s| s.inner_radius = s.outer_radius);
        bad(|s| s.inner_radius = 0.0);
        bad(|s| s.outer_radius = 48.0);
        bad(|s| s.contraction = 0.31);
        bad(|s| s.contraction = -0.01);
        bad(|s| s.edge_width = 0.0);
        bad(|s| s.taper_start = 10.0);
        bad(|s| {
            s.noise = Some(NoiseSpec {
                sigma: -1.0,
                seed: 0,
            })
        });
    }

    #[test]
    fn roi_is_a_band_around_the_ring() {
        let spec = PhantomSpec::default();
        let pair = make_pair(&spec).unwrap();
        let g = pair.roi.grid();
        let cf = spec.contracted_center();
        for r in 0..g.height {
            for c in 0..g.width {
                let (x1, x2) = g.position(r, c);
                let rho = fmath::hypot(x1 - cf.0, x2 - cf.1);
                let inside = rho >= (1.0 - spec.contraction) * spec.inner_radius
                    && rho <= spec.outer_radius;
                assert_eq!(pair.roi.get(r, c), inside);
            }
        }
        assert!(pair.roi.foreground_count() > 500);
    }
}
