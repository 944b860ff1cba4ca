//! Spacing-aware finite-difference stencils shared by the strain tensor, the
//! regularizer gradients, and the Jacobian-determinant map.
//!
//! Interior pixels use central differences, boundary pixels one-sided
//! first-order differences; all derivatives are per millimetre. The adjoint
//! (transpose) of each operator is spelled out explicitly so analytic
//! gradients of functionals built on these stencils reduce to chain rule plus
//! `d_*_transpose`. Both directions are plain sequential loops, keeping
//! gradient assembly deterministic.

use alloc::vec;
use alloc::vec::Vec;

/// d/dx1 (along columns): central in the interior, one-sided at the left and
/// right edges, scaled by 1/sx.
pub(crate) fn d_x(f: &[f64], width: usize, height: usize, sx: f64) -> Vec<f64> {
    debug_assert!(width >= 2 && f.len() == width * height);
    let mut g = vec![0.0; f.len()];
    let inv = 1.0 / sx;
    let inv2 = 0.5 / sx;
    for row in 0..height {
        let r = row * width;
        g[r] = (f[r + 1] - f[r]) * inv;
        for col in 1..width - 1 {
            g[r + col] = (f[r + col + 1] - f[r + col - 1]) * inv2;
        }
        g[r + width - 1] = (f[r + width - 1] - f[r + width - 2]) * inv;
    }
    g
}

/// d/dx2 (along rows): central in the interior, one-sided at the top and
/// bottom edges, scaled by 1/sy.
pub(crate) fn d_y(f: &[f64], width: usize, height: usize, sy: f64) -> Vec<f64> {
    debug_assert!(height >= 2 && f.len() == width * height);
    let mut g = vec![0.0; f.len()];
    let inv = 1.0 / sy;
    let inv2 = 0.5 / sy;
    for col in 0..width {
        g[col] = (f[width + col] - f[col]) * inv;
    }
    for row in 1..height - 1 {
        let r = row * width;
        for col in 0..width {
            g[r + col] = (f[r + width + col] - f[r - width + col]) * inv2;
        }
    }
    let last = (height - 1) * width;
    for col in 0..width {
        g[last + col] = (f[last + col] - f[last - width + col]) * inv;
    }
    g
}

/// Adjoint of [`d_x`]: accumulates `h` through the transposed stencil, so
/// that `<d_x(f), h> == <f, d_x_transpose(h)>` exactly (up to rounding).
pub(crate) fn d_x_transpose(h: &[f64], width: usize, height: usize, sx: f64) -> Vec<f64> {
    debug_assert!(width >= 2 && h.len() == width * height);
    let mut y = vec![0.0; h.len()];
    let inv = 1.0 / sx;
    let inv2 = 0.5 / sx;
    for row in 0..height {
        let r = row * width;
        y[r] -= h[r] * inv;
        y[r + 1] += h[r] * inv;
        for col in 1..width - 1 {
            y[r + col - 1] -= h[r + col] * inv2;
            y[r + col + 1] += h[r + col] * inv2;
        }
        y[r + width - 2] -= h[r + width - 1] * inv;
        y[r + width - 1] += h[r + width - 1] * inv;
    }
    y
}

/// Adjoint of [`d_y`].
pub(crate) fn d_y_transpose(h: &[f64], width: usize, height: usize, sy: f64) -> Vec<f64> {
    debug_assert!(height >= 2 && h.len() == width * height);
    let mut y = vec![0.0; h.len()];
    let inv = 1.0 / sy;
    let inv2 = 0.5 / sy;
    for col in 0..width {
        y[col] -= h[col] * inv;
        y[width + col] += h[col] * inv;
    }
    for row in 1..height - 1 {
        let r = row * width;
        for col in 0..width {
            y[r - width + col] -= h[r + col] * inv2;
            y[r + width + col] += h[r + col] * inv2;
        }
    }
    let last = (height - 1) * width;
    for col in 0..width {
        y[last - width + col] -= h[last + col] * inv;
        y[last + col] += h[last + col] * inv;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn derivatives_are_exact_on_linear_fields() {
        // f(x1, x2) = 3 x1 - 2 x2 has d/dx1 = 3, d/dx2 = -2 at every pixel,
        // including the one-sided boundary rows/columns.
        let (w, h, sx, sy) = (7, 5, 0.5, 2.0);
        let mut f = vec![0.0; w * h];
        for row in 0..h {
            for col in 0..w {
                f[row * w + col] = 3.0 * (col as f64 * sx) - 2.0 * (row as f64 * sy);
            }
        }
        for v in d_x(&f, w, h, sx) {
            assert!((v - 3.0).abs() < 1e-12);
        }
        for v in d_y(&f, w, h, sy) {
            assert!((v + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_sided_and_central_stencils_on_a_known_row() {
        // Row [0, 1, 4, 9] with sx = 1: d_x = [1, 2, 4, 5].
        let f = [0.0, 1.0, 4.0, 9.0, 0.0, 1.0, 4.0, 9.0];
        let g = d_x(&f, 4, 2, 1.0);
        assert_eq!(&g[..4], &[1.0, 2.0, 4.0, 5.0]);
    }

    #[test]
    fn width_two_grid_uses_one_sided_everywhere() {
        let f = [1.0, 4.0, 2.0, 8.0];
        let g = d_x(&f, 2, 2, 1.0);
        assert_eq!(g, vec![3.0, 3.0, 6.0, 6.0]);
    }

    #[test]
    fn transpose_is_the_exact_adjoint() {
        // <D f, h> == <f, D^T h> for random f, h on several grid shapes.
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for &(w, h) in &[(2usize, 2usize), (3, 2), (2, 5), (8, 8), (13, 7)] {
            let n = w * h;
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let hh: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (sx, sy) = (rng.gen_range(0.3..2.0), rng.gen_range(0.3..2.0));
            let lhs = dot(&d_x(&f, w, h, sx), &hh);
            let rhs = dot(&f, &d_x_transpose(&hh, w, h, sx));
            assert!((lhs - rhs).abs() < 1e-12, "d_x adjoint: {lhs} vs {rhs}");
            let lhs = dot(&d_y(&f, w, h, sy), &hh);
            let rhs = dot(&f, &d_y_transpose(&hh, w, h, sy));
            assert!((lhs - rhs).abs() < 1e-12, "d_y adjoint: {lhs} vs {rhs}");
        }
    }
}
