//! Linear-elastic machinery: infinitesimal strain, an isotropic plane-stress
//! material, strain-energy density, and the two field regularizers.
//!
//! The strain of a displacement field `u = (u1, u2)` is the 3-vector per
//! pixel
//!
//! ```text
//! e = [ du1/dx1,  du2/dx2,  (du1/dx2 + du2/dx1) / 2 ]
//! ```
//!
//! with derivatives from the shared stencils (central interior, one-sided
//! boundary, per mm). The third entry is the *tensor* shear component, i.e.
//! half the engineering shear, and it is paired with `C33 = E / (2(1+nu))`;
//! relative to the engineering-shear convention the shear energy therefore
//! carries an extra factor of 1/4. This pairing is deliberate and kept
//! verbatim; only ratios between material parameters matter to the optimizer,
//! not the absolute energy scale.
//!
//! Strain-energy density is `W = e^T C e / 2` with the plane-stress stiffness
//!
//! ```text
//! C = [ E/(1-nu^2)      nu*E/(1-nu^2)  0
//!       nu*E/(1-nu^2)   E/(1-nu^2)     0
//!       0               0              E/(2(1+nu)) ]
//! ```
//!
//! (the closed-form inverse of the standard plane-stress compliance matrix).
//! The strain-energy regularizer is the L2 norm of the per-pixel `W` image;
//! its null space is exactly the rigid motions: translations have zero
//! strain, and infinitesimal rotations have zero symmetric strain.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::field::DisplacementField2D;
use crate::fmath;
use crate::grid::Grid2D;
use crate::image::ScalarImage2D;
use crate::stencil;

/// Isotropic plane-stress material `(E, nu)` with `E > 0`, `0 <= nu < 0.5`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    young: f64,
    poisson: f64,
}

impl Material {
    pub fn new(young: f64, poisson: f64) -> Result<Self, Error> {
        if !(young.is_finite() && young > 0.0 && poisson.is_finite() && (0.0..0.5).contains(&poisson))
        {
            return Err(Error::InvalidMaterial { young, poisson });
        }
        Ok(Self { young, poisson })
    }

    #[inline]
    pub fn young(&self) -> f64 {
        self.young
    }

    #[inline]
    pub fn poisson(&self) -> f64 {
        self.poisson
    }

    /// The distinct stiffness entries `(C11 = C22, C12, C33)`.
    #[inline]
    pub fn stiffness_entries(&self) -> (f64, f64, f64) {
        let e = self.young;
        let nu = self.poisson;
        let plane = e / (1.0 - nu * nu);
        (plane, nu * plane, e / (2.0 * (1.0 + nu)))
    }

    /// The full symmetric 3x3 plane-stress stiffness matrix.
    pub fn stiffness_matrix(&self) -> [[f64; 3]; 3] {
        let (c11, c12, c33) = self.stiffness_entries();
        [[c11, c12, 0.0], [c12, c11, 0.0], [0.0, 0.0, c33]]
    }
}

impl Default for Material {
    /// Unit Young's modulus with nu = 0.4 (nearly incompressible soft
    /// tissue), the registration default.
    fn default() -> Self {
        Self {
            young: 1.0,
            poisson: 0.4,
        }
    }
}

/// Per-pixel infinitesimal strain components on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct StrainField2D {
    grid: Grid2D,
    e11: Vec<f64>,
    e22: Vec<f64>,
    e12: Vec<f64>,
}

impl StrainField2D {
    pub fn new(grid: Grid2D, e11: Vec<f64>, e22: Vec<f64>, e12: Vec<f64>) -> Result<Self, Error> {
        if e11.len() != grid.len() || e22.len() != grid.len() || e12.len() != grid.len() {
            return Err(Error::InvalidData {
                reason: "strain channel length does not equal width * height",
            });
        }
        Ok(Self {
            grid,
            e11,
            e22,
            e12,
        })
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    /// Normal strain along `x1`.
    #[inline]
    pub fn e11(&self) -> &[f64] {
        &self.e11
    }

    /// Normal strain along `x2`.
    #[inline]
    pub fn e22(&self) -> &[f64] {
        &self.e22
    }

    /// Tensor shear component (half the engineering shear).
    #[inline]
    pub fn e12(&self) -> &[f64] {
        &self.e12
    }
}

/// Per-pixel strain-energy density; non-negative for valid materials.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyField(ScalarImage2D);

impl EnergyField {
    #[inline]
    pub fn as_image(&self) -> &ScalarImage2D {
        &self.0
    }

    pub fn into_image(self) -> ScalarImage2D {
        self.0
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.0.grid()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        self.0.data()
    }
}

/// Infinitesimal strain of `u` using the shared difference stencils.
pub fn strain_tensor(u: &DisplacementField2D) -> StrainField2D {
    let g = u.grid();
    let (sx, sy) = g.spacing;
    let e11 = stencil::d_x(u.u1(), g.width, g.height, sx);
    let e22 = stencil::d_y(u.u2(), g.width, g.height, sy);
    let du1_dy = stencil::d_y(u.u1(), g.width, g.height, sy);
    let du2_dx = stencil::d_x(u.u2(), g.width, g.height, sx);
    let e12 = du1_dy
        .iter()
        .zip(&du2_dx)
        .map(|(&a, &b)| 0.5 * (a + b))
        .collect();
    StrainField2D {
        grid: g,
        e11,
        e22,
        e12,
    }
}

/// Per-pixel strain-energy density `W = e^T C e / 2`.
pub fn strain_energy_density(strain: &StrainField2D, material: &Material) -> EnergyField {
    let (c11, c12, c33) = material.stiffness_entries();
    let data: Vec<f64> = strain
        .e11
        .iter()
        .zip(&strain.e22)
        .zip(&strain.e12)
        .map(|((&a, &b), &s)| {
            let w = 0.5 * (c11 * a * a + c11 * b * b + 2.0 * c12 * a * b + c33 * s * s);
            // The quadratic form is positive semidefinite; clamp away the
            // tiny negative values cancellation can produce.
            w.max(0.0)
        })
        .collect();
    EnergyField(ScalarImage2D::new(strain.grid, data).expect("lengths match by construction"))
}

/// Strain-energy regularizer: the L2 norm (root of the sum of squares) of
/// the per-pixel energy densities, with its analytic gradient.
///
/// With `normalize_by_pixels` the value and gradient are divided by the pixel
/// count, making the penalty resolution-independent; the default
/// configuration leaves it off.
pub fn strain_energy_reg(
    u: &DisplacementField2D,
    material: &Material,
    normalize_by_pixels: bool,
) -> (f64, DisplacementField2D) {
    let g = u.grid();
    let (sx, sy) = g.spacing;
    let n = g.len();
    let strain = strain_tensor(u);
    let energy = strain_energy_density(&strain, material);

    let sum_sq: f64 = energy.data().iter().map(|&w| w * w).sum();
    let value_raw = fmath::sqrt(sum_sq);
    let scale = if normalize_by_pixels {
        1.0 / n as f64
    } else {
        1.0
    };

    if value_raw == 0.0 {
        // Zero strain everywhere (rigid motion): the norm is at its minimum
        // and we take the zero subgradient.
        return (0.0, DisplacementField2D::zeros(g));
    }

    let (c11, c12, c33) = material.stiffness_entries();
    // dV/dW_p = W_p / V, then dW/de through the stiffness, then the stencil
    // adjoints back onto the displacement channels.
    let mut a1 = vec![0.0; n];
    let mut a2 = vec![0.0; n];
    let mut a3 = vec![0.0; n];
    for i in 0..n {
        let k = energy.data()[i] / value_raw * scale;
        let (e1, e2, e3) = (strain.e11[i], strain.e22[i], strain.e12[i]);
        a1[i] = k * (c11 * e1 + c12 * e2);
        a2[i] = k * (c12 * e1 + c11 * e2);
        a3[i] = k * (c33 * e3);
    }
    let mut gu1 = stencil::d_x_transpose(&a1, g.width, g.height, sx);
    let mut gu2 = stencil::d_y_transpose(&a2, g.width, g.height, sy);
    let half_a3: Vec<f64> = a3.iter().map(|&v| 0.5 * v).collect();
    let s1 = stencil::d_y_transpose(&half_a3, g.width, g.height, sy);
    let s2 = stencil::d_x_transpose(&half_a3, g.width, g.height, sx);
    for i in 0..n {
        gu1[i] += s1[i];
        gu2[i] += s2[i];
    }
    (
        value_raw * scale,
        DisplacementField2D::from_raw(g, gu1, gu2),
    )
}

/// Baseline smoothness regularizer: mean over pixels of
/// `|grad u1|^2 + |grad u2|^2`, with its analytic gradient. Unlike the
/// strain-energy penalty it is *not* invariant to rotations.
pub fn gradient_l2_reg(u: &DisplacementField2D) -> (f64, DisplacementField2D) {
    let g = u.grid();
    let (sx, sy) = g.spacing;
    let n = g.len();
    let g1x = stencil::d_x(u.u1(), g.width, g.height, sx);
    let g1y = stencil::d_y(u.u1(), g.width, g.height, sy);
    let g2x = stencil::d_x(u.u2(), g.width, g.height, sx);
    let g2y = stencil::d_y(u.u2(), g.width, g.height, sy);

    let mut sum = 0.0;
    for i in 0..n {
        sum += g1x[i] * g1x[i] + g1y[i] * g1y[i] + g2x[i] * g2x[i] + g2y[i] * g2y[i];
    }
    let value = sum / n as f64;

    let two_over_n = 2.0 / n as f64;
    let t1 = stencil::d_x_transpose(&g1x, g.width, g.height, sx);
    let t2 = stencil::d_y_transpose(&g1y, g.width, g.height, sy);
    let t3 = stencil::d_x_transpose(&g2x, g.width, g.height, sx);
    let t4 = stencil::d_y_transpose(&g2y, g.width, g.height, sy);
    let gu1 = t1
        .iter()
        .zip(&t2)
        .map(|(&a, &b)| two_over_n * (a + b))
        .collect();
    let gu2 = t3
        .iter()
        .zip(&t4)
        .map(|(&a, &b)| two_over_n * (a + b))
        .collect();
    (value, DisplacementField2D::from_raw(g, gu1, gu2))
}
