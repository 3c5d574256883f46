//! Independent QFI from finite differences of the Gaussian fidelity.
//!
//! For neighbouring states `ρ(d ± ε/2)` the Bures distance gives
//! `F_Q ≈ 8 (1 - √F) / ε²`, where `F` is the (squared) Uhlmann fidelity.
//! `1 - √F` is of order `ε²` and is evaluated in double-double arithmetic.

use nalgebra::{Complex, DMatrix, DVector};

use crate::channel::ImagingChannel;
use crate::ddfloat::Dd;
use crate::error::{Error, Result};
use crate::linalg::Dense;
use crate::psf::{mode_overlaps, GaussianPsf};
use crate::symplectic::{omega_n, GaussianState, PHYSICALITY_TOL, SYMMETRY_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Finite-difference step `ε` (length).
    pub step: f64,
    pub richardson: bool,
    /// Absolute floor (1/length²) below which level disagreement is ignored.
    pub tol: f64,
    /// Largest relative disagreement accepted between the `ε` and `ε/2` levels.
    pub level_tolerance: f64,
}

impl OracleConfig {
    /// Default configuration for a PSF of width `w`.
    pub fn for_width(w: f64) -> Self {
        Self {
            step: 1e-2 * w,
            richardson: true,
            tol: 1e-9 / (w * w),
            level_tolerance: 1e-3,
        }
    }

    pub fn validate(&self, w: f64) -> Result<()> {
        if !(self.step > 0.0 && self.step < 0.1 * w) {
            return Err(Error::InvalidParameter {
                name: "step",
                value: self.step,
                reason: "finite-difference step must lie in (0, 0.1 w)",
            });
        }
        Ok(())
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self::for_width(1.0)
    }
}

/// Gaussian moments in an `n`-mode frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub cov: DMatrix<f64>,
    pub mean: DVector<f64>,
}

impl From<&GaussianState> for Moments {
    fn from(s: &GaussianState) -> Self {
        Self {
            cov: DMatrix::from_fn(4, 4, |i, j| s.cov()[(i, j)]),
            mean: DVector::from_fn(4, |i, _| s.mean()[i]),
        }
    }
}

/// A one-parameter family of states. The two states at `d₁` and `d₂` are
/// returned in a common mode frame so that their fidelity is meaningful.
pub trait StateFamily: Sync {
    fn common_frame(&self, d1: f64, d2: f64) -> Result<(Moments, Moments)>;
    /// Width used to validate the step size.
    fn length_scale(&self) -> f64 {
        1.0
    }
}

/// Family whose modes do not depend on `d`.
pub struct FixedModeFamily<F> {
    pub state_at: F,
    pub scale: f64,
}

impl<F> StateFamily for FixedModeFamily<F>
where
    F: Fn(f64) -> Result<GaussianState> + Sync,
{
    fn common_frame(&self, d1: f64, d2: f64) -> Result<(Moments, Moments)> {
        Ok((
            Moments::from(&(self.state_at)(d1)?),
            Moments::from(&(self.state_at)(d2)?),
        ))
    }

    fn length_scale(&self) -> f64 {
        self.scale
    }
}

/// A `d`-independent state; its QFI is zero.
pub struct ConstantFamily(pub GaussianState);

impl StateFamily for ConstantFamily {
    fn common_frame(&self, _: f64, _: f64) -> Result<(Moments, Moments)> {
        Ok((Moments::from(&self.0), Moments::from(&self.0)))
    }
}

/// Image-plane states of a fixed source. The modes `u±(d)` move with `d`; both
/// states are embedded in the four-mode frame spanned by `u±(d₁)` and the
/// orthogonal parts of `u±(d₂)`, the extra modes being in vacuum.
pub struct ImagingFamily {
    pub source: GaussianState,
    pub kappa: f64,
    pub psf: GaussianPsf,
}

impl StateFamily for ImagingFamily {
    fn common_frame(&self, d1: f64, d2: f64) -> Result<(Moments, Moments)> {
        let s1 = ImagingChannel::new(self.kappa, &self.psf, d1)?.propagate(&self.source)?;
        let s2 = ImagingChannel::new(self.kappa, &self.psf, d2)?.propagate(&self.source)?;
        let (cp, cm) = mode_overlaps(&self.psf, d1, d2)?;
        let sp = (1.0 - cp * cp).max(0.0).sqrt();
        let sm = (1.0 - cm * cm).max(0.0).sqrt();
        let mode = DMatrix::from_row_slice(
            4,
            4,
            &[
                cp, 0.0, -sp, 0.0, //
                0.0, cm, 0.0, -sm, //
                sp, 0.0, cp, 0.0, //
                0.0, sm, 0.0, cm,
            ],
        );
        let rot = mode.kronecker(&DMatrix::<f64>::identity(2, 2));
        let embed = |s: &GaussianState| {
            let mut cov = DMatrix::<f64>::identity(8, 8);
            let mut mean = DVector::<f64>::zeros(8);
            for i in 0..4 {
                mean[i] = s.mean()[i];
                for j in 0..4 {
                    cov[(i, j)] = s.cov()[(i, j)];
                }
            }
            Moments { cov, mean }
        };
        let a = embed(&s1);
        let b = embed(&s2);
        let b = Moments {
            cov: &rot * b.cov * rot.transpose(),
            mean: &rot * b.mean,
        };
        Ok((a, b))
    }

    fn length_scale(&self) -> f64 {
        self.psf.w()
    }
}

/// `1 - √F` and `F` for two Gaussian states in the same frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityValue {
    pub fidelity: f64,
    pub root_infidelity: f64,
}

fn check_moments(m: &Moments) -> Result<()> {
    let n = m.cov.nrows();
    if n % 2 != 0 || m.cov.ncols() != n || m.mean.len() != n {
        return Err(Error::InvalidParameter {
            name: "cov",
            value: n as f64,
            reason: "covariance must be square with even dimension matching the mean",
        });
    }
    let asym = (&m.cov - m.cov.transpose()).abs().max();
    if !(asym <= SYMMETRY_TOL) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let om = omega_n(n / 2);
    let h = DMatrix::from_fn(n, n, |i, j| Complex::new(m.cov[(i, j)], om[(i, j)]));
    let min = h.symmetric_eigenvalues().min();
    if min < -PHYSICALITY_TOL {
        return Err(Error::Unphysical { min_eigenvalue: min });
    }
    Ok(())
}

/// Uhlmann fidelity `(tr√(√ρ σ √ρ))²` of two Gaussian states in a common
/// `n`-mode frame (vacuum covariance `𝟙`).
pub fn gaussian_fidelity_moments(a: &Moments, b: &Moments) -> Result<FidelityValue> {
    check_moments(a)?;
    check_moments(b)?;
    if a.cov.nrows() != b.cov.nrows() {
        return Err(Error::InvalidParameter {
            name: "cov",
            value: b.cov.nrows() as f64,
            reason: "states live in frames of different size",
        });
    }
    let n = a.cov.nrows();
    let half = Dd::new(0.5);
    let a1 = Dense::<Dd>::from_nalgebra(&a.cov).scale(half);
    let a2 = Dense::<Dd>::from_nalgebra(&b.cov).scale(half);
    let om = Dense::<Dd>::from_nalgebra(&omega_n(n / 2));
    let sum = a1.add(&a2);
    let sum_inv = sum.inverse().ok_or(Error::Unphysical { min_eigenvalue: 0.0 })?;
    let inner = om.scale(Dd::new(0.25)).add(&a2.matmul(&om).matmul(&a1));
    let v_aux = om.transpose().matmul(&sum_inv).matmul(&inner);
    let x = v_aux.matmul(&om);
    let x_inv = x.inverse().ok_or(Error::Unphysical { min_eigenvalue: 0.0 })?;
    let m = Dense::identity(n).add(&x_inv.matmul(&x_inv).scale(Dd::new(0.25)));
    let ev = m.eigenvalues().ok_or(Error::OracleUncertain {
        relative_change: f64::NAN,
    })?;

    // Π (1 + √μ); complex pairs contribute |1 + √μ|².
    let mut prod = Dd::ONE;
    let mut i = 0;
    while i < ev.len() {
        let (re, im) = ev[i];
        if im.to_f64() != 0.0 && i + 1 < ev.len() {
            let modulus = (re * re + im * im).sqrt();
            let root_re = ((modulus + re) * half).sqrt();
            prod = prod * (Dd::ONE + root_re * Dd::new(2.0) + modulus);
            i += 2;
        } else {
            let mu = if re < Dd::ZERO { Dd::ZERO } else { re };
            prod = prod * (Dd::ONE + mu.sqrt());
            i += 1;
        }
    }
    let f4 = prod * v_aux.scale(Dd::new(2.0)).det() / sum.det();
    let du: Vec<Dd> = (0..n).map(|k| Dd::new(a.mean[k]) - Dd::new(b.mean[k])).collect();
    let v_sum_inv = sum_inv.scale(half);
    let quad = du
        .iter()
        .zip(v_sum_inv.matvec(&du))
        .fold(Dd::ZERO, |acc, (&u, w)| acc + u * w);
    let root = f4.sqrt().sqrt() * (-(quad * Dd::new(0.25))).exp();
    let root_infidelity = (Dd::ONE - root).to_f64();
    let r = root.to_f64();
    Ok(FidelityValue {
        fidelity: (r * r).clamp(0.0, 1.0),
        root_infidelity,
    })
}

/// Uhlmann fidelity of two two-mode Gaussian states.
pub fn gaussian_fidelity(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    gaussian_fidelity_moments(&Moments::from(a), &Moments::from(b)).map(|f| f.fidelity)
}

/// `8 (1 - √F(ρ_{d-ε/2}, ρ_{d+ε/2})) / ε²` at a single step.
fn bures_quotient<F: StateFamily + ?Sized>(family: &F, d: f64, eps: f64) -> Result<f64> {
    let (a, b) = family.common_frame(d - eps / 2.0, d + eps / 2.0)?;
    let f = gaussian_fidelity_moments(&a, &b)?;
    Ok(8.0 * f.root_infidelity / (eps * eps))
}

/// Finite-difference QFI of `family` at `d`.
pub fn qfi_finite_difference<F: StateFamily + ?Sized>(
    family: &F,
    d: f64,
    cfg: &OracleConfig,
) -> Result<f64> {
    cfg.validate(family.length_scale())?;
    let coarse = bures_quotient(family, d, cfg.step)?;
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = bures_quotient(family, d, cfg.step / 2.0)?;
    let change = (fine - coarse).abs() / fine.abs().max(cfg.tol);
    if change > cfg.level_tolerance && (fine - coarse).abs() > cfg.tol {
        return Err(Error::OracleUncertain {
            relative_change: change,
        });
    }
    Ok((4.0 * fine - coarse) / 3.0)
}
