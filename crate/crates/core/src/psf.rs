//! Separation-dependent scalars of a Gaussian point-spread function.
//!
//! The two sources sit at `(±d/2, 0)`. The PSF is
//! `u₀(r) = √(2/(πw²)) exp(-|r|²/w²)` and the image modes are
//! `u±(r) = [u₀(r - r₀) ± u₀(r + r₀)] / √(2(1 ± δ))`.
//!
//! All functions accept physical lengths and return physical values; internally
//! they work with `s = d/w`.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};

/// A point-spread function sampled by the quadrature oracle.
pub trait Psf: Sync {
    /// Length scale used to size integration domains and tolerances.
    fn width(&self) -> f64;
    fn value(&self, x: f64, y: f64) -> f64;
    /// `∂u₀/∂x`.
    fn dx(&self, x: f64, y: f64) -> f64;
}

/// Gaussian PSF of width `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPsf {
    w: f64,
}

impl GaussianPsf {
    pub fn new(w: f64) -> Result<Self> {
        check_finite("w", w)?;
        if w <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "w",
                value: w,
                reason: "PSF width must be positive",
            });
        }
        Ok(Self { w })
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    fn reduced(&self, d: f64, strict: bool) -> Result<f64> {
        check_finite("d", d)?;
        if d < 0.0 || (strict && d == 0.0) {
            return Err(Error::InvalidParameter {
                name: "d",
                value: d,
                reason: if strict {
                    "separation must be positive"
                } else {
                    "separation must be non-negative"
                },
            });
        }
        Ok(d / self.w)
    }
}

impl Psf for GaussianPsf {
    fn width(&self) -> f64 {
        self.w
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        let w2 = self.w * self.w;
        (2.0 / (std::f64::consts::PI * w2)).sqrt() * (-(x * x + y * y) / w2).exp()
    }

    fn dx(&self, x: f64, y: f64) -> f64 {
        -2.0 * x / (self.w * self.w) * self.value(x, y)
    }
}

/// `δ = exp(-d²/(2w²))`.
pub fn overlap_delta(psf: &GaussianPsf, d: f64) -> Result<f64> {
    let s = psf.reduced(d, false)?;
    Ok((-0.5 * s * s).exp())
}

/// `1 - δ` without cancellation at small `d`.
pub fn one_minus_delta(psf: &GaussianPsf, d: f64) -> Result<f64> {
    let s = psf.reduced(d, false)?;
    Ok(-(-0.5 * s * s).exp_m1())
}

/// `∂δ/∂d = -(d/w²) exp(-d²/(2w²))`.
pub fn d_delta(psf: &GaussianPsf, d: f64) -> Result<f64> {
    let s = psf.reduced(d, false)?;
    Ok(-s * (-0.5 * s * s).exp() / psf.w)
}

/// `(Δk)² = ∫ (∂ₓu₀)² = 1/w²`.
pub fn delta_k_squared(psf: &GaussianPsf) -> f64 {
    1.0 / (psf.w * psf.w)
}

/// `β = ∫ ∂ₓu₀(r - r₀) ∂ₓu₀(r + r₀) = (1 - d²/w²) exp(-d²/(2w²)) / w²`.
pub fn beta(psf: &GaussianPsf, d: f64) -> Result<f64> {
    let s = psf.reduced(d, false)?;
    Ok((1.0 - s * s) * (-0.5 * s * s).exp() / (psf.w * psf.w))
}

/// `(η₊², η₋²)`, the squared norms of `∂u±/∂d`, normalisation included.
///
/// With `t = d²/w²` and `E = e^{-t/2}`:
///
/// ```text
/// η₊² w² = (1 - E² + tE) / (4 (1 + E)²)
/// η₋² w² = (1 - E² - tE) / (4 (1 - E)²)
/// ```
///
/// The second numerator starts at `t³/24`; it is summed as a series for small
/// `t`.
pub fn eta_squared(psf: &GaussianPsf, d: f64) -> Result<(f64, f64)> {
    let s = psf.reduced(d, true)?;
    let t = s * s;
    let e = (-0.5 * t).exp();
    let one_minus_e2 = -(-t).exp_m1();
    let plus = (one_minus_e2 + t * e) / (4.0 * (1.0 + e).powi(2));
    let minus_num = if t < 1.0 {
        eta_minus_series(t)
    } else {
        one_minus_e2 - t * e
    };
    let one_minus_e = -(-0.5 * t).exp_m1();
    let minus = minus_num / (4.0 * one_minus_e * one_minus_e);
    let w2 = psf.w * psf.w;
    Ok((plus / w2, minus / w2))
}

/// `Σ_{m≥3} c_m t^m` with `c_m = -(-1)^m/m! - (-1/2)^{m-1}/(m-1)!`.
fn eta_minus_series(t: f64) -> f64 {
    let mut sum = 0.0;
    // a = (-t)^m / m!, b = t (-t/2)^{m-1} / (m-1)!
    let mut a = -t;
    let mut b = t;
    for m in 1..60 {
        if m >= 2 {
            a *= -t / m as f64;
            b *= -0.5 * t / (m - 1) as f64;
        }
        let term = -a - b;
        sum += term;
        if m > 3 && term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Every `d`-dependent PSF scalar, in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGeometry {
    pub d: f64,
    pub delta: f64,
    /// `1 - δ`, kept separately for accuracy at small `d`.
    pub one_minus_delta: f64,
    pub d_delta: f64,
    pub dk2: f64,
    pub beta: f64,
    pub eta_plus2: f64,
    pub eta_minus2: f64,
}

impl ModeGeometry {
    pub fn eta_plus(&self) -> f64 {
        self.eta_plus2.sqrt()
    }

    pub fn eta_minus(&self) -> f64 {
        self.eta_minus2.sqrt()
    }
}

/// Bundles the geometry at separation `d > 0`.
pub fn mode_geometry(psf: &GaussianPsf, d: f64) -> Result<ModeGeometry> {
    let (eta_plus2, eta_minus2) = eta_squared(psf, d)?;
    Ok(ModeGeometry {
        d,
        delta: overlap_delta(psf, d)?,
        one_minus_delta: one_minus_delta(psf, d)?,
        d_delta: d_delta(psf, d)?,
        dk2: delta_k_squared(psf),
        beta: beta(psf, d)?,
        eta_plus2,
        eta_minus2,
    })
}

/// Overlaps `(⟨u₊(d₁)|u₊(d₂)⟩, ⟨u₋(d₁)|u₋(d₂)⟩)` of the image modes at two
/// separations.
pub fn mode_overlaps(psf: &GaussianPsf, d1: f64, d2: f64) -> Result<(f64, f64)> {
    let s1 = psf.reduced(d1, true)?;
    let s2 = psf.reduced(d2, true)?;
    let o = |x: f64| (-0.5 * x * x).exp();
    let near = o(0.5 * (s1 - s2));
    let far = o(0.5 * (s1 + s2));
    let (p1, p2) = (1.0 + o(s1), 1.0 + o(s2));
    let m1 = -(-0.5 * s1 * s1).exp_m1();
    let m2 = -(-0.5 * s2 * s2).exp_m1();
    // near - far without cancellation: e^{-a} - e^{-b} = e^{-a}(1 - e^{a-b}).
    let a = 0.125 * (s1 - s2).powi(2);
    let b = 0.125 * (s1 + s2).powi(2);
    let diff = -near * (a - b).exp_m1();
    Ok(((near + far) / (p1 * p2).sqrt(), diff / (m1 * m2).sqrt()))
}
