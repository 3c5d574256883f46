//! Quantum Fisher information for the separation `d`.
//!
//! With the Williamson decomposition `V = S(ν₊𝟙 ⊕ ν₋𝟙)Sᵀ` of the image-plane
//! covariance and `D = η₊𝟙 ⊕ η₋𝟙`:
//!
//! ```text
//! F   = F_V + F_x̄
//! F_V = ½ Σ_{l,j,k} [ a²_{jk,l} / (ν_jν_k - (-1)^l) + 2 ã²_{kj,l} / (ν_j - (-1)^l) ]
//! F_x̄ = ∂x̄ᵀ V⁻¹ ∂x̄ + x̄ᵀ D² x̄
//! a_{jk,l} = tr[A_{jk,l} S⁻¹ ∂V S⁻ᵀ],   ã_{jk,l} = tr[A_{jk,l} S⁻¹ (V - 𝟙) D]
//! ```

use crate::channel::ImagingChannel;
use crate::error::{check_finite, Error, Result};
use crate::psf::{self, GaussianPsf};
use crate::sources::SourceSpec;
use crate::symplectic::{williamson, GaussianState, Mat2, Mat4, Vec4};
use crate::D_MIN_OVER_W;

/// How `∂V` is brought into the Williamson frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceTransform {
    /// `S⁻¹ ∂V S⁻ᵀ`.
    #[default]
    Congruence,
    /// `S⁻¹ ∂V S`.
    Similarity,
}

/// Which block index the mode-derivative coefficient is paired with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TildeIndexOrder {
    /// `ã_{kj}` paired with denominator `ν_j`.
    #[default]
    Swapped,
    /// `ã_{jk}` paired with denominator `ν_j`.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub transform: CovarianceTransform,
    pub tilde_order: TildeIndexOrder,
    /// Denominators below this are treated as singular.
    pub singular_denominator: f64,
    /// A singular addend is dropped only if its squared numerator is below this.
    pub singular_numerator: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            transform: CovarianceTransform::Congruence,
            tilde_order: TildeIndexOrder::Swapped,
            singular_denominator: 1e-10,
            singular_numerator: 1e-18,
        }
    }
}

/// The sixteen orthonormal matrices `A^{(l)}_{jk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub matrices: [Mat4; 16],
}

impl BasisSet {
    fn index(l: usize, j: usize, k: usize) -> usize {
        assert!(l < 4 && j < 2 && k < 2);
        4 * l + 2 * j + k
    }

    /// `l ∈ 0..4`; `j, k ∈ {0, 1}` for `{+, -}`.
    pub fn get(&self, l: usize, j: usize, k: usize) -> &Mat4 {
        &self.matrices[Self::index(l, j, k)]
    }

    /// `tr(A M)` for every basis element.
    pub fn coefficients(&self, m: &Mat4) -> [f64; 16] {
        let mt = m.transpose();
        std::array::from_fn(|i| self.matrices[i].component_mul(&mt).sum())
    }
}

pub fn basis_set() -> BasisSet {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let blocks = [
        Mat2::new(0.0, 1.0, -1.0, 0.0),
        Mat2::new(1.0, 0.0, 0.0, -1.0),
        Mat2::identity(),
        Mat2::new(0.0, 1.0, 1.0, 0.0),
    ];
    BasisSet {
        matrices: std::array::from_fn(|i| {
            let (l, j, k) = (i / 4, (i / 2) % 2, i % 2);
            let mut m = Mat4::zeros();
            m.fixed_view_mut::<2, 2>(2 * j, 2 * k)
                .copy_from(&(blocks[l] * r));
            m
        }),
    }
}

/// One `(l, j, k)` addend of `F_V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiTerm {
    pub l: usize,
    pub j: usize,
    pub k: usize,
    pub a: f64,
    pub a_tilde: f64,
    /// `½ a² / (ν_jν_k - (-1)^l)`.
    pub cov_term: f64,
    /// `ã² / (ν_j - (-1)^l)`.
    pub mode_term: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QfiBreakdown {
    pub f_total: f64,
    pub f_cov: f64,
    pub f_mean: f64,
    pub terms: Vec<QfiTerm>,
}

/// QFI of `source` imaged with transmission `kappa` at separation `d`.
pub fn qfi(source: &SourceSpec, kappa: f64, psf: &GaussianPsf, d: f64) -> Result<QfiBreakdown> {
    qfi_with(source, kappa, psf, d, &EngineConfig::default())
}

pub fn qfi_with(
    source: &SourceSpec,
    kappa: f64,
    psf: &GaussianPsf,
    d: f64,
    cfg: &EngineConfig,
) -> Result<QfiBreakdown> {
    check_finite("d", d)?;
    if d < D_MIN_OVER_W * psf.w() * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d,
            reason: "separation below the supported minimum of 1e-3 w",
        });
    }
    let channel = ImagingChannel::new(kappa, psf, d)?;
    qfi_for_state(&source.state()?, &channel, cfg)
}

/// QFI for an arbitrary `d`-independent source state.
pub fn qfi_for_state(
    source: &GaussianState,
    channel: &ImagingChannel,
    cfg: &EngineConfig,
) -> Result<QfiBreakdown> {
    let image = channel.propagate(source)?;
    let (dv, dx) = channel.propagate_derivatives(source);
    let g = channel.geometry();
    assemble(
        image.cov(),
        image.mean(),
        &dv,
        &dx,
        (g.eta_plus(), g.eta_minus()),
        cfg,
    )
}

/// Evaluates the QFI from image-plane moments, their derivatives and
/// `(η₊, η₋)`. Only the squares of `η±` matter.
pub fn assemble(
    v: &Mat4,
    x: &Vec4,
    dv: &Mat4,
    dx: &Vec4,
    eta: (f64, f64),
    cfg: &EngineConfig,
) -> Result<QfiBreakdown> {
    let w = williamson(v)?;
    let nu = w.nu_array();
    let s_inv = w.s_inverse();
    let d = Mat4::from_diagonal(&Vec4::new(eta.0, eta.0, eta.1, eta.1));
    let x_mat = match cfg.transform {
        CovarianceTransform::Congruence => s_inv * dv * s_inv.transpose(),
        CovarianceTransform::Similarity => s_inv * dv * w.s,
    };
    let y_mat = s_inv * (v - Mat4::identity()) * d;
    let basis = basis_set();
    let a = basis.coefficients(&x_mat);
    let at = basis.coefficients(&y_mat);

    let mut terms = Vec::with_capacity(16);
    let mut f_cov = 0.0;
    for l in 0..4 {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..2 {
            for k in 0..2 {
                let a_jk = a[BasisSet::index(l, j, k)];
                let a_tilde = match cfg.tilde_order {
                    TildeIndexOrder::Swapped => at[BasisSet::index(l, k, j)],
                    TildeIndexOrder::Direct => at[BasisSet::index(l, j, k)],
                };
                let cov_term = 0.5
                    * guarded_ratio(a_jk * a_jk, nu[j] * nu[k] - sign, (l, j, k), cfg)?;
                let mode_term = guarded_ratio(a_tilde * a_tilde, nu[j] - sign, (l, j, k), cfg)?;
                f_cov += cov_term + mode_term;
                terms.push(QfiTerm {
                    l,
                    j,
                    k,
                    a: a_jk,
                    a_tilde,
                    cov_term,
                    mode_term,
                });
            }
        }
    }

    let chol = v.cholesky().ok_or_else(|| Error::Unphysical {
        min_eigenvalue: v.symmetric_eigenvalues().min(),
    })?;
    let f_mean = dx.dot(&chol.solve(dx)) + (d * x).norm_squared();
    Ok(QfiBreakdown {
        f_total: f_cov + f_mean,
        f_cov,
        f_mean,
        terms,
    })
}

fn guarded_ratio(
    numerator: f64,
    denominator: f64,
    (l, j, k): (usize, usize, usize),
    cfg: &EngineConfig,
) -> Result<f64> {
    if denominator.abs() < cfg.singular_denominator {
        if numerator < cfg.singular_numerator {
            return Ok(0.0);
        }
        return Err(Error::DivergentTerm {
            l,
            j,
            k,
            numerator,
            denominator,
        });
    }
    Ok(numerator / denominator)
}

/// `2κN₀((Δk)² - β cos φ)` for a coherent pair.
pub fn qfi_coherent_closed_form(
    n0: f64,
    kappa: f64,
    phi: f64,
    psf: &GaussianPsf,
    d: f64,
) -> Result<f64> {
    let b = psf::beta(psf, d)?;
    Ok(2.0 * kappa * n0 * (psf::delta_k_squared(psf) - b * phi.cos()))
}

/// `2κN₀ max(f₊, f₋)`, `f± = (Δk)² ∓ β + κ(∂δ)² / (1 - κ(1 ± δ))`.
pub fn qfi_upper_bound(n0: f64, kappa: f64, psf: &GaussianPsf, d: f64) -> Result<f64> {
    let delta = psf::overlap_delta(psf, d)?;
    let dd = psf::d_delta(psf, d)?;
    let dk2 = psf::delta_k_squared(psf);
    let b = psf::beta(psf, d)?;
    let margin_plus = 1.0 - kappa * (1.0 + delta);
    let margin_minus = 1.0 - kappa * psf::one_minus_delta(psf, d)?;
    let margin = margin_plus.min(margin_minus);
    if margin <= 0.0 {
        return Err(Error::DivisionGuard { margin });
    }
    let f_plus = dk2 - b + kappa * dd * dd / margin_plus;
    let f_minus = dk2 + b + kappa * dd * dd / margin_minus;
    Ok(2.0 * kappa * n0 * f_plus.max(f_minus))
}

/// `2κN₀(1 - γ cos φ)/w²`.
pub fn qfi_small_d_limit(n0: f64, kappa: f64, gamma: f64, phi: f64, psf: &GaussianPsf) -> f64 {
    2.0 * kappa * n0 * (1.0 - gamma * phi.cos()) * psf::delta_k_squared(psf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    fn unit() -> GaussianPsf {
        GaussianPsf::new(1.0).unwrap()
    }

    #[test]
    fn basis_is_orthonormal() {
        let b = basis_set();
        for (i, x) in b.matrices.iter().enumerate() {
            for (j, y) in b.matrices.iter().enumerate() {
                let ip = (x.transpose() * y).trace();
                assert_relative_eq!(ip, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-15);
            }
        }
        assert_relative_eq!((b.get(2, 0, 0).transpose() * b.get(2, 0, 0)).trace(), 1.0);
    }

    #[test]
    fn basis_expansion_reconstructs_any_matrix() {
        let m = Mat4::from_fn(|i, j| (i * 4 + j) as f64 - 7.3);
        let b = basis_set();
        let c = b.coefficients(&m);
        let back = b
            .matrices
            .iter()
            .zip(c)
            .fold(Mat4::zeros(), |acc, (a, ci)| acc + a.transpose() * ci);
        assert_relative_eq!(back, m, epsilon = 1e-13);
    }

    #[test]
    fn coherent_matches_closed_form() {
        let psf = unit();
        for &phi in &[0.0, PI / E, PI] {
            for &d in &[0.05, 0.5, 1.0, 3.0] {
                let f = qfi(&SourceSpec::Coherent { n0: 5.0, phi }, 0.05, &psf, d).unwrap();
                let c = qfi_coherent_closed_form(5.0, 0.05, phi, &psf, d).unwrap();
                assert_relative_eq!(f.f_total, c, max_relative = 1e-10);
                assert_relative_eq!(f.f_total, f.f_cov + f.f_mean);
            }
        }
    }

    #[test]
    fn closed_form_special_points() {
        let psf = unit();
        assert_relative_eq!(
            qfi_coherent_closed_form(1.0, 0.1, 0.3, &psf, 1.0).unwrap(),
            0.2
        );
        assert_eq!(qfi_coherent_closed_form(1.0, 0.1, 0.0, &psf, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn small_d_limit_values() {
        let psf = unit();
        assert_relative_eq!(qfi_small_d_limit(1.0, 0.1, 0.0, 0.0, &psf), 0.2);
        assert_relative_eq!(qfi_small_d_limit(1.0, 0.1, 1.0, PI, &psf), 0.4);
        assert_eq!(qfi_small_d_limit(1.0, 0.1, 1.0, 0.0, &psf), 0.0);
    }

    #[test]
    fn upper_bound_guard_and_far_field() {
        let psf = unit();
        assert!(matches!(
            qfi_upper_bound(1.0, 0.5, &psf, 0.0),
            Err(Error::DivisionGuard { .. })
        ));
        let d = 0.6;
        let b = psf::beta(&psf, d).unwrap();
        let ub = qfi_upper_bound(1.0, 1e-9, &psf, d).unwrap();
        assert_relative_eq!(ub, 2e-9 * (1.0 + b.abs()), max_relative = 1e-8);
    }

    #[test]
    fn rejects_separation_below_minimum() {
        let r = qfi(&SourceSpec::Coherent { n0: 1.0, phi: 0.0 }, 0.1, &unit(), 1e-4);
        assert!(matches!(r, Err(Error::InvalidParameter { name: "d", .. })));
    }

    #[test]
    fn eta_sign_does_not_matter() {
        let psf = unit();
        let ch = ImagingChannel::new(0.1, &psf, 0.8).unwrap();
        let src = crate::sources::make_correlated_thermal(2.0, 0.6, 1.1).unwrap();
        let img = ch.propagate(&src).unwrap();
        let (dv, dx) = ch.propagate_derivatives(&src);
        let g = ch.geometry();
        let cfg = EngineConfig::default();
        let base = assemble(img.cov(), img.mean(), &dv, &dx, (g.eta_plus(), g.eta_minus()), &cfg)
            .unwrap();
        for signs in [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            let eta = (signs.0 * g.eta_plus(), signs.1 * g.eta_minus());
            let f = assemble(img.cov(), img.mean(), &dv, &dx, eta, &cfg).unwrap();
            assert_relative_eq!(f.f_total, base.f_total, max_relative = 1e-12);
        }
    }

    #[test]
    fn singular_rule() {
        let cfg = EngineConfig::default();
        assert_eq!(guarded_ratio(1e-20, 1e-12, (0, 0, 0), &cfg), Ok(0.0));
        assert!(matches!(
            guarded_ratio(1e-6, 1e-12, (2, 1, 0), &cfg),
            Err(Error::DivergentTerm { l: 2, j: 1, k: 0, .. })
        ));
        assert_eq!(guarded_ratio(1.0, 2.0, (0, 0, 0), &cfg), Ok(0.5));
    }

    #[test]
    fn incoherent_far_field_is_flat() {
        let psf = unit();
        for &d in &[0.2, 1.0, 3.0] {
            let f = qfi(
                &SourceSpec::CorrelatedThermal { n0: 0.1, gamma: 0.0, phi: 0.0 },
                1e-3,
                &psf,
                d,
            )
            .unwrap();
            assert!((f.f_total / 2e-4 - 1.0).abs() < 0.01);
        }
    }
}
