//! Registration quality metrics.
//!
//! Overlap scores (Dice, Jaccard), boundary-based distances (Hausdorff,
//! average surface distance), displacement-field regularity via the local
//! Jacobian determinant, and a paired two-sided t-test for comparing metric
//! samples across cases.
//!
//! Distances are measured between pixel centers in mm, so anisotropic
//! spacing is respected. Boundary extraction uses 4-connectivity and treats
//! the image border as background.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::field::DisplacementField2D;
use crate::fmath;
use crate::image::{BinaryMask2D, ScalarImage2D, SegMaskSet};
use crate::stencil;
use crate::warp::warp_mask_hard;

/// Dice overlap of two masks on the same grid. Two empty masks count as a
/// perfect match (1.0).
pub fn dice(a: &BinaryMask2D, b: &BinaryMask2D) -> Result<f64, Error> {
    a.grid().require_matches(&b.grid())?;
    let mut inter = 0usize;
    let mut total = 0usize;
    for (pa, pb) in a.data().iter().zip(b.data()) {
        inter += (pa & pb) as usize;
        total += (pa + pb) as usize;
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / total as f64)
}

/// Jaccard index (intersection over union). Two empty masks give 1.0.
pub fn jaccard(a: &BinaryMask2D, b: &BinaryMask2D) -> Result<f64, Error> {
    a.grid().require_matches(&b.grid())?;
    let mut inter = 0usize;
    let mut union = 0usize;
    for (pa, pb) in a.data().iter().zip(b.data()) {
        inter += (pa & pb) as usize;
        union += (pa | pb) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Physical coordinates (mm) of the centers of boundary pixels: foreground
/// pixels with at least one background 4-neighbor, where neighbors outside
/// the image count as background.
pub fn boundary_points(mask: &BinaryMask2D) -> Vec<(f64, f64)> {
    let g = mask.grid();
    let (w, h) = (g.width, g.height);
    let mut points = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if mask.data()[g.idx(r, c)] == 0 {
                continue;
            }
            let edge = r == 0
                || r == h - 1
                || c == 0
                || c == w - 1
                || mask.data()[g.idx(r - 1, c)] == 0
                || mask.data()[g.idx(r + 1, c)] == 0
                || mask.data()[g.idx(r, c - 1)] == 0
                || mask.data()[g.idx(r, c + 1)] == 0;
            if edge {
                points.push(g.position(r, c));
            }
        }
    }
    points
}

fn min_distance_to(set: &[(f64, f64)], p: (f64, f64)) -> f64 {
    let mut best = f64::INFINITY;
    for &(qx, qy) in set {
        let d = fmath::hypot(p.0 - qx, p.1 - qy);
        if d < best {
            best = d;
        }
    }
    best
}

/// Boundary point clouds of two masks, in mm.
type BoundaryPair = (Vec<(f64, f64)>, Vec<(f64, f64)>);

fn boundary_pair(a: &BinaryMask2D, b: &BinaryMask2D) -> Result<BoundaryPair, Error> {
    a.grid().require_matches(&b.grid())?;
    let pa = boundary_points(a);
    let pb = boundary_points(b);
    if pa.is_empty() || pb.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok((pa, pb))
}

/// Symmetric Hausdorff distance (mm) between mask boundaries, computed by
/// exhaustive point-pair search.
pub fn hausdorff_distance(a: &BinaryMask2D, b: &BinaryMask2D) -> Result<f64, Error> {
    let (pa, pb) = boundary_pair(a, b)?;
    let mut worst = 0.0f64;
    for &p in &pa {
        let d = min_distance_to(&pb, p);
        if d > worst {
            worst = d;
        }
    }
    for &q in &pb {
        let d = min_distance_to(&pa, q);
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// Symmetric average surface distance (mm): mean of nearest-boundary
/// distances pooled over both directions.
pub fn average_surface_distance(a: &BinaryMask2D, b: &BinaryMask2D) -> Result<f64, Error> {
    let (pa, pb) = boundary_pair(a, b)?;
    let mut sum = 0.0;
    for &p in &pa {
        sum += min_distance_to(&pb, p);
    }
    for &q in &pb {
        sum += min_distance_to(&pa, q);
    }
    Ok(sum / (pa.len() + pb.len()) as f64)
}

/// Per-pixel determinant of the local deformation Jacobian `I + grad(u)`,
/// using the same finite-difference stencils as the strain computation.
/// Values below 1 indicate local compression, above 1 expansion, and
/// non-positive values a folded (non-invertible) deformation.
pub fn jacobian_determinant_map(u: &DisplacementField2D) -> ScalarImage2D {
    let g = u.grid();
    let du1dx = stencil::d_x(u.u1(), g.width, g.height, g.spacing.0);
    let du1dy = stencil::d_y(u.u1(), g.width, g.height, g.spacing.1);
    let du2dx = stencil::d_x(u.u2(), g.width, g.height, g.spacing.0);
    let du2dy = stencil::d_y(u.u2(), g.width, g.height, g.spacing.1);
    let mut det = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        det.push((1.0 + du1dx[i]) * (1.0 + du2dy[i]) - du1dy[i] * du2dx[i]);
    }
    ScalarImage2D::new(g, det).expect("grid unchanged")
}

/// Mean and population standard deviation of `|det - 1|` over an image of
/// Jacobian determinants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobianStats {
    pub mean_abs_dev: f64,
    pub std_abs_dev: f64,
    /// Number of pixels with `det <= 0` (folding).
    pub non_positive: usize,
}

impl JacobianStats {
    pub fn from_map(map: &ScalarImage2D) -> Self {
        let n = map.data().len() as f64;
        let mut sum = 0.0;
        let mut non_positive = 0usize;
        for &v in map.data() {
            sum += (v - 1.0).abs();
            if v <= 0.0 {
                non_positive += 1;
            }
        }
        let mean = sum / n;
        let mut var = 0.0;
        for &v in map.data() {
            let d = (v - 1.0).abs() - mean;
            var += d * d;
        }
        Self {
            mean_abs_dev: mean,
            std_abs_dev: fmath::sqrt(var / n),
            non_positive,
        }
    }

    /// `"mean ± std"` with four decimals, for reports.
    pub fn formatted(&self) -> String {
        format!("{:.4} ± {:.4}", self.mean_abs_dev, self.std_abs_dev)
    }
}

/// Result of a two-sided paired t-test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairedTTest {
    pub t_statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Two-sided paired t-test on equal-length samples `a` and `b`.
///
/// The statistic is `mean(d) / (sd(d) / sqrt(n))` for differences
/// `d = a - b` with the n-1 sample standard deviation; the p-value comes
/// from the regularized incomplete beta function. Fewer than two pairs or
/// zero-variance differences are rejected as degenerate.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest, Error> {
    if a.len() != b.len() {
        return Err(Error::DegenerateSample {
            reason: "paired samples differ in length",
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::DegenerateSample {
            reason: "need at least two pairs",
        });
    }
    let mut mean = 0.0;
    for i in 0..n {
        mean += a[i] - b[i];
    }
    mean /= n as f64;
    let mut var = 0.0;
    for i in 0..n {
        let d = (a[i] - b[i]) - mean;
        var += d * d;
    }
    var /= (n - 1) as f64;
    if var == 0.0 {
        return Err(Error::DegenerateSample {
            reason: "paired differences have zero variance",
        });
    }
    let t = mean / fmath::sqrt(var / n as f64);
    let dof = (n - 1) as f64;
    let x = dof / (dof + t * t);
    let p = special::reg_inc_beta(0.5 * dof, 0.5, x);
    Ok(PairedTTest {
        t_statistic: t,
        degrees_of_freedom: n - 1,
        p_value: p,
    })
}

/// Per-structure overlap and surface metrics, plus field regularity.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureMetrics {
    pub label: String,
    pub dice: f64,
    pub jaccard: f64,
    pub hausdorff_mm: f64,
    pub average_surface_mm: f64,
}

/// Full metric set for one registered case.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub structures: Vec<StructureMetrics>,
    /// Present when a displacement field was supplied.
    pub jacobian: Option<JacobianStats>,
}

/// Compares each moving structure against the fixed structure with the same
/// label, after warping the moving masks by `u` when given. Structure sets
/// must contain identical label collections.
pub fn evaluate_masks(
    moving: &SegMaskSet,
    fixed: &SegMaskSet,
    u: Option<&DisplacementField2D>,
) -> Result<MetricReport, Error> {
    moving.grid().require_matches(&fixed.grid())?;
    if moving.structures().len() != fixed.structures().len() {
        return Err(Error::LabelMismatch {
            detail: format!(
                "{} moving structures vs {} fixed",
                moving.structures().len(),
                fixed.structures().len()
            ),
        });
    }
    let mut structures = Vec::with_capacity(moving.structures().len());
    for s in moving.structures() {
        let f = fixed.get(&s.label).ok_or_else(|| Error::LabelMismatch {
            detail: format!("structure {:?} missing from fixed set", s.label),
        })?;
        let compared = match u {
            Some(field) => warp_mask_hard(&s.mask, field)?,
            None => s.mask.clone(),
        };
        structures.push(StructureMetrics {
            label: s.label.clone(),
            dice: dice(&compared, &f.mask)?,
            jaccard: jaccard(&compared, &f.mask)?,
            hausdorff_mm: hausdorff_distance(&compared, &f.mask)?,
            average_surface_mm: average_surface_distance(&compared, &f.mask)?,
        });
    }
    let jacobian = u.map(|field| JacobianStats::from_map(&jacobian_determinant_map(field)));
    Ok(MetricReport {
        structures,
        jacobian,
    })
}

/// Log-gamma and the regularized incomplete beta function, needed for the
/// t-distribution tail probability.
mod special {
    use crate::fmath;

    /// Lanczos approximation (g = 7, 9 terms).
    const LANCZOS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];

    pub fn ln_gamma(x: f64) -> f64 {
        let pi = core::f64::consts::PI;
        if x < 0.5 {
            // Reflection: Gamma(x) * Gamma(1-x) = pi / sin(pi x).
            return fmath::ln(pi / fmath::sin(pi * x)) - ln_gamma(1.0 - x);
        }
        let z = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + 7.5;
        0.5 * fmath::ln(2.0 * pi) + (z + 0.5) * fmath::ln(t) - t + fmath::ln(acc)
    }

    /// Continued-fraction core of the incomplete beta (modified Lentz).
    fn betacf(a: f64, b: f64, x: f64) -> f64 {
        const MAX_ITER: usize = 300;
        const EPS: f64 = 1e-15;
        const FPMIN: f64 = 1e-300;
        let qab = a + b;
        let qap = a + 1.0;
        let qam = a - 1.0;
        let mut c = 1.0;
        let mut d = 1.0 - qab * x / qap;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        d = 1.0 / d;
        let mut h = d;
        for m in 1..=MAX_ITER {
            let mf = m as f64;
            let m2 = 2.0 * mf;
            let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = 1.0 + aa / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            h *= d * c;
            let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = 1.0 + aa / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h
    }

    /// Regularized incomplete beta `I_x(a, b)`.
    pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
            + a * fmath::ln(x)
            + b * fmath::ln(1.0 - x);
        let front = fmath::exp(ln_front);
        if x < (a + 1.0) / (a + b + 2.0) {
            front * betacf(a, b, x) / a
        } else {
            1.0 - front * betacf(b, a, 1.0 - x) / b
        }
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn ln_gamma_matches_known_values() {
            // Gamma(1) = 1, Gamma(5) = 24, Gamma(0.5) = sqrt(pi).
            assert!(ln_gamma(1.0).abs() < 1e-12);
            assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-12);
            assert!((ln_gamma(0.5) - core::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
            // Recurrence Gamma(x+1) = x Gamma(x) off the integers.
            let x = 3.7;
            assert!((ln_gamma(x + 1.0) - (ln_gamma(x) + x.ln())).abs() < 1e-12);
        }

        #[test]
        fn incomplete_beta_identities() {
            // I_x(1, 1) = x.
            for &x in &[0.1, 0.25, 0.5, 0.9] {
                assert!((reg_inc_beta(1.0, 1.0, x) - x).abs() < 1e-12);
            }
            // Symmetry: I_x(a, b) = 1 - I_{1-x}(b, a).
            for &(a, b, x) in &[(2.0, 3.0, 0.3), (0.5, 5.0, 0.7), (4.5, 1.5, 0.12)] {
                let lhs = reg_inc_beta(a, b, x);
                let rhs = 1.0 - reg_inc_beta(b, a, 1.0 - x);
                assert!((lhs - rhs).abs() < 1e-12, "a={a} b={b} x={x}");
            }
            assert_eq!(reg_inc_beta(2.0, 2.0, 0.0), 0.0);
            assert_eq!(reg_inc_beta(2.0, 2.0, 1.0), 1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use proptest::prelude::*;

    fn grid(w: usize, h: usize, s: (f64, f64)) -> Grid2D {
        Grid2D::new(w, h, s).unwrap()
    }

    fn rect_mask(g: Grid2D, r0: usize, r1: usize, c0: usize, c1: usize) -> BinaryMask2D {
        BinaryMask2D::from_fn(g, |r, c| r >= r0 && r < r1 && c >= c0 && c < c1)
    }

    #[test]
    fn dice_and_jaccard_on_half_overlapping_squares() {
        let g = grid(8, 8, (1.0, 1.0));
        let a = rect_mask(g, 0, 4, 0, 4); // 16 px
        let b = rect_mask(g, 0, 4, 2, 6); // 16 px, intersection 8 px
        assert!((dice(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        assert!((jaccard(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_masks_are_a_perfect_match() {
        let g = grid(4, 4, (1.0, 1.0));
        let e = rect_mask(g, 0, 0, 0, 0);
        let a = rect_mask(g, 0, 2, 0, 2);
        assert_eq!(dice(&e, &e).unwrap(), 1.0);
        assert_eq!(jaccard(&e, &e).unwrap(), 1.0);
        assert_eq!(dice(&e, &a).unwrap(), 0.0);
        assert_eq!(jaccard(&a, &e).unwrap(), 0.0);
    }

    #[test]
    fn boundary_of_solid_square_excludes_interior() {
        let g = grid(6, 6, (1.0, 1.0));
        let m = rect_mask(g, 1, 5, 1, 5); // 4x4 block, 2x2 interior
        let pts = boundary_points(&m);
        assert_eq!(pts.len(), 12);
        // Interior pixel centers (2,2).. must be absent.
        assert!(!pts.contains(&(2.0, 2.0)));
        assert!(pts.contains(&(1.0, 1.0)));
    }

    #[test]
    fn border_pixels_count_as_boundary() {
        let g = grid(4, 4, (1.0, 1.0));
        let all = BinaryMask2D::from_fn(g, |_, _| true);
        // Interior 2x2 is surrounded by foreground; the 12 border pixels
        // touch the image edge.
        assert_eq!(boundary_points(&all).len(), 12);
    }

    #[test]
    fn hausdorff_between_offset_pixels_is_the_offset() {
        let g = grid(8, 2, (1.0, 1.0));
        let a = rect_mask(g, 0, 1, 0, 1);
        let b = rect_mask(g, 0, 1, 3, 4);
        assert!((hausdorff_distance(&a, &b).unwrap() - 3.0).abs() < 1e-15);
        assert!((average_surface_distance(&a, &b).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn surface_distances_respect_spacing() {
        let g = grid(8, 2, (0.5, 2.0));
        let a = rect_mask(g, 0, 1, 0, 1);
        let b = rect_mask(g, 0, 1, 3, 4); // 3 columns * 0.5 mm
        assert!((hausdorff_distance(&a, &b).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn identical_masks_have_zero_surface_distance() {
        let g = grid(7, 7, (1.0, 1.0));
        let m = rect_mask(g, 1, 5, 2, 6);
        assert_eq!(hausdorff_distance(&m, &m).unwrap(), 0.0);
        assert_eq!(average_surface_distance(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn empty_mask_distance_is_rejected() {
        let g = grid(4, 4, (1.0, 1.0));
        let e = rect_mask(g, 0, 0, 0, 0);
        let a = rect_mask(g, 0, 2, 0, 2);
        assert!(matches!(
            hausdorff_distance(&e, &a),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn jacobian_of_zero_field_is_exactly_one() {
        let g = grid(9, 7, (1.0, 1.0));
        let u = DisplacementField2D::zeros(g);
        let map = jacobian_determinant_map(&u);
        assert!(map.data().iter().all(|&v| v == 1.0));
        let stats = JacobianStats::from_map(&map);
        assert_eq!(stats.mean_abs_dev, 0.0);
        assert_eq!(stats.std_abs_dev, 0.0);
        assert_eq!(stats.non_positive, 0);
    }

    #[test]
    fn uniform_dilation_determinant_is_squared_scale() {
        // u = 0.05 * x gives J = diag(1.05, 1.05), det = 1.1025, exact for
        // a linear field even at the one-sided borders.
        let g = grid(10, 8, (1.0, 1.5));
        let u = DisplacementField2D::from_fn(g, |r, c| {
            let (x1, x2) = g.position(r, c);
            (0.05 * x1, 0.05 * x2)
        });
        let map = jacobian_determinant_map(&u);
        for &v in map.data() {
            assert!((v - 1.1025).abs() < 1e-12);
        }
        let stats = JacobianStats::from_map(&map);
        assert!((stats.mean_abs_dev - 0.1025).abs() < 1e-12);
        assert!(stats.std_abs_dev < 1e-12);
        assert_eq!(stats.formatted(), "0.1025 ± 0.0000");
    }

    #[test]
    fn infinitesimal_rotation_determinant_exceeds_one_quadratically() {
        let theta = 0.01f64;
        let g = grid(12, 12, (1.0, 1.0));
        let u = DisplacementField2D::from_fn(g, |r, c| {
            let (x1, x2) = g.position(r, c);
            (theta * x2, -theta * x1)
        });
        let map = jacobian_determinant_map(&u);
        for &v in map.data() {
            assert!((v - (1.0 + theta * theta)).abs() < 1e-12);
        }
    }

    #[test]
    fn folding_is_counted() {
        // u1 = -2 x1 flips the x1 axis: det = 1 - 2 = -1 < 0 everywhere.
        let g = grid(6, 6, (1.0, 1.0));
        let u = DisplacementField2D::from_fn(g, |_, c| (-2.0 * c as f64, 0.0));
        let stats = JacobianStats::from_map(&jacobian_determinant_map(&u));
        assert_eq!(stats.non_positive, g.len());
    }

    #[test]
    fn paired_t_test_matches_reference_values() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [0.0; 5];
        let r = paired_t_test(&a, &b).unwrap();
        assert_eq!(r.degrees_of_freedom, 4);
        assert!((r.t_statistic - 4.242_640_687_119_285).abs() < 1e-12);
        assert!((r.p_value - 0.013_23).abs() < 1e-3, "p = {}", r.p_value);
        // Swapping the samples negates t but keeps p.
        let s = paired_t_test(&b, &a).unwrap();
        assert!((s.t_statistic + r.t_statistic).abs() < 1e-12);
        assert!((s.p_value - r.p_value).abs() < 1e-12);
    }

    #[test]
    fn t_test_of_identical_noise_gives_p_one() {
        let a = [0.3, -0.1, 0.4, -0.6];
        let b = [-0.6, 0.4, -0.1, 0.3]; // same sum, nonzero diff variance
        let r = paired_t_test(&a, &b).unwrap();
        assert!((r.t_statistic).abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_t_test_inputs_are_rejected() {
        assert!(matches!(
            paired_t_test(&[1.0], &[2.0]),
            Err(Error::DegenerateSample { .. })
        ));
        assert!(matches!(
            paired_t_test(&[1.0, 2.0], &[0.0, 1.0]), // constant difference
            Err(Error::DegenerateSample { .. })
        ));
        assert!(matches!(
            paired_t_test(&[1.0, 2.0, 3.0], &[0.0, 1.0]),
            Err(Error::DegenerateSample { .. })
        ));
    }

    #[test]
    fn evaluate_masks_on_identical_sets_is_perfect() {
        use crate::image::{SegMaskSet, SegStructure};
        let g = grid(10, 10, (1.0, 1.0));
        let set = SegMaskSet::new(
            [
                SegStructure {
                    label: "inner".into(),
                    mask: rect_mask(g, 3, 7, 3, 7),
                },
                SegStructure {
                    label: "outer".into(),
                    mask: rect_mask(g, 1, 9, 1, 9),
                },
            ]
            .into(),
        )
        .unwrap();
        let report = evaluate_masks(&set, &set, None).unwrap();
        assert_eq!(report.structures.len(), 2);
        for s in &report.structures {
            assert_eq!(s.dice, 1.0);
            assert_eq!(s.jaccard, 1.0);
            assert_eq!(s.hausdorff_mm, 0.0);
            assert_eq!(s.average_surface_mm, 0.0);
        }
        assert!(report.jacobian.is_none());
    }

    #[test]
    fn evaluate_masks_rejects_label_mismatch() {
        use crate::image::{SegMaskSet, SegStructure};
        let g = grid(6, 6, (1.0, 1.0));
        let a = SegMaskSet::new(
            [SegStructure {
                label: "left".into(),
                mask: rect_mask(g, 1, 4, 1, 4),
            }]
            .into(),
        )
        .unwrap();
        let b = SegMaskSet::new(
            [SegStructure {
                label: "right".into(),
                mask: rect_mask(g, 1, 4, 1, 4),
            }]
            .into(),
        )
        .unwrap();
        assert!(matches!(
            evaluate_masks(&a, &b, None),
            Err(Error::LabelMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn jaccard_is_dice_over_two_minus_dice(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = grid(9, 7, (1.0, 1.0));
            let a = BinaryMask2D::from_fn(g, |_, _| rng.gen_bool(0.4));
            let b = BinaryMask2D::from_fn(g, |_, _| rng.gen_bool(0.4));
            let d = dice(&a, &b).unwrap();
            let j = jaccard(&a, &b).unwrap();
            prop_assert!((j - d / (2.0 - d)).abs() < 1e-12);
        }

        #[test]
        fn hausdorff_dominates_average_distance(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = grid(10, 10, (1.0, 1.0));
            let a = rect_mask(
                g,
                rng.gen_range(0..3),
                rng.gen_range(4..10),
                rng.gen_range(0..3),
                rng.gen_range(4..10),
            );
            let b = rect_mask(
                g,
                rng.gen_range(0..3),
                rng.gen_range(4..10),
                rng.gen_range(0..3),
                rng.gen_range(4..10),
            );
            let hd = hausdorff_distance(&a, &b).unwrap();
            let asd = average_surface_distance(&a, &b).unwrap();
            prop_assert!(hd >= asd - 1e-12);
        }
    }
}
