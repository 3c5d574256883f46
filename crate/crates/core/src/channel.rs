//! Propagation of the source modes to the image plane.
//!
//! The symmetric and antisymmetric source combinations pass through two
//! independent loss channels with transmissions `κ± = κ(1 ± δ)`. In the image
//! basis `(q₊, p₊, q₋, p₋)`:
//!
//! ```text
//! T = [[a₊𝟙, a₊𝟙], [a₋𝟙, -a₋𝟙]],  a± = √(κ±/2)
//! N = (1 - κ₊)𝟙 ⊕ (1 - κ₋)𝟙
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::psf::{mode_geometry, GaussianPsf, ModeGeometry};
use crate::symplectic::{GaussianState, Mat4, Vec4};

/// Transmission above which the far-field assumptions behind the upper bound
/// are considered stretched.
pub const FAR_FIELD_KAPPA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagingChannel {
    kappa: f64,
    geometry: ModeGeometry,
}

/// `T`, `N` and their derivatives with respect to `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationMatrices {
    pub t: Mat4,
    pub n: Mat4,
    pub dt: Mat4,
    pub dn: Mat4,
}

impl ImagingChannel {
    pub fn new(kappa: f64, psf: &GaussianPsf, d: f64) -> Result<Self> {
        Self::from_geometry(kappa, mode_geometry(psf, d)?)
    }

    pub fn from_geometry(kappa: f64, geometry: ModeGeometry) -> Result<Self> {
        check_finite("kappa", kappa)?;
        if kappa <= 0.0 || kappa >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
                reason: "transmission must lie in (0, 1)",
            });
        }
        if kappa * (1.0 + geometry.delta) > 1.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
                reason: "κ(1 + δ) exceeds one",
            });
        }
        if kappa > FAR_FIELD_KAPPA {
            log::warn!("κ = {kappa} is outside the far-field regime (κ ≪ 1)");
        }
        Ok(Self { kappa, geometry })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn geometry(&self) -> &ModeGeometry {
        &self.geometry
    }

    /// `(κ₊, κ₋)`.
    pub fn transmissions(&self) -> (f64, f64) {
        let g = &self.geometry;
        (self.kappa * (1.0 + g.delta), self.kappa * g.one_minus_delta)
    }

    pub fn build_matrices(&self) -> PropagationMatrices {
        let (kp, km) = self.transmissions();
        let ap = (kp / 2.0).sqrt();
        let am = (km / 2.0).sqrt();
        let dk = self.kappa * self.geometry.d_delta;
        let dap = dk / (4.0 * ap);
        let dam = -dk / (4.0 * am);
        PropagationMatrices {
            t: mode_transform(ap, am),
            n: Mat4::from_diagonal(&Vec4::new(1.0 - kp, 1.0 - kp, 1.0 - km, 1.0 - km)),
            dt: mode_transform(dap, dam),
            dn: Mat4::from_diagonal(&Vec4::new(-dk, -dk, dk, dk)),
        }
    }

    /// Image-plane state `x̄ = T x̄ₛ`, `V = T Vₛ Tᵀ + N`.
    pub fn propagate(&self, source: &GaussianState) -> Result<GaussianState> {
        let m = self.build_matrices();
        let cov = m.t * source.cov() * m.t.transpose() + m.n;
        GaussianState::new(m.t * source.mean(), cov)
    }

    /// `(∂V/∂d, ∂x̄/∂d)` for a `d`-independent source.
    pub fn propagate_derivatives(&self, source: &GaussianState) -> (Mat4, Vec4) {
        let m = self.build_matrices();
        let vs = source.cov();
        let dv = m.dt * vs * m.t.transpose() + m.t * vs * m.dt.transpose() + m.dn;
        (dv, m.dt * source.mean())
    }
}

fn mode_transform(a: f64, b: f64) -> Mat4 {
    let mut t = Mat4::zeros();
    for i in 0..2 {
        t[(i, i)] = a;
        t[(i, i + 2)] = a;
        t[(i + 2, i)] = b;
        t[(i + 2, i + 2)] = -b;
    }
    t
}
