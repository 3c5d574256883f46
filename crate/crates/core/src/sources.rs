//! Two-mode Gaussian source families and the degree of mutual coherence.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::symplectic::{rotation, squeeze, GaussianState, Mat2, Mat4, Vec4};

/// Photon numbers at or below this make a mode dark for the coherence functional.
pub const DARK_MODE_THRESHOLD: f64 = 1e-15;

/// A source family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceSpec {
    /// Zero-mean thermal modes with cross-correlation `⟨a₁†a₂⟩ = N₀γe^{iφ}`.
    CorrelatedThermal { n0: f64, gamma: f64, phi: f64 },
    /// Thermal noise `N₀(1-γ)` on top of displacements carrying `γN₀` photons.
    DisplacedThermal { n0: f64, gamma: f64, phi: f64 },
    /// Coherent pair, identical to `DisplacedThermal` with `γ = 1`.
    Coherent { n0: f64, phi: f64 },
    /// Two squeezed vacua, `N₀ = sinh²ξ`, with axes rotated by `θ`.
    #[serde(rename = "squeezed", alias = "squeezed-pair")]
    SqueezedPair { n0: f64, theta: f64 },
}

impl SourceSpec {
    pub fn n0(&self) -> f64 {
        match *self {
            SourceSpec::CorrelatedThermal { n0, .. }
            | SourceSpec::DisplacedThermal { n0, .. }
            | SourceSpec::Coherent { n0, .. }
            | SourceSpec::SqueezedPair { n0, .. } => n0,
        }
    }

    /// `(γ, φ)` for the families that have a coherence parameter.
    pub fn coherence(&self) -> Option<(f64, f64)> {
        match *self {
            SourceSpec::CorrelatedThermal { gamma, phi, .. }
            | SourceSpec::DisplacedThermal { gamma, phi, .. } => Some((gamma, phi)),
            SourceSpec::Coherent { phi, .. } => Some((1.0, phi)),
            SourceSpec::SqueezedPair { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SourceSpec::CorrelatedThermal { .. } => "correlated-thermal",
            SourceSpec::DisplacedThermal { .. } => "displaced-thermal",
            SourceSpec::Coherent { .. } => "coherent",
            SourceSpec::SqueezedPair { .. } => "squeezed",
        }
    }

    /// Same family with a different mean photon number.
    pub fn with_n0(&self, n0: f64) -> Self {
        let mut out = *self;
        match &mut out {
            SourceSpec::CorrelatedThermal { n0: n, .. }
            | SourceSpec::DisplacedThermal { n0: n, .. }
            | SourceSpec::Coherent { n0: n, .. }
            | SourceSpec::SqueezedPair { n0: n, .. } => *n = n0,
        }
        out
    }

    pub fn state(&self) -> Result<GaussianState> {
        match *self {
            SourceSpec::CorrelatedThermal { n0, gamma, phi } => {
                make_correlated_thermal(n0, gamma, phi)
            }
            SourceSpec::DisplacedThermal { n0, gamma, phi } => {
                make_displaced_thermal(n0, gamma, phi)
            }
            SourceSpec::Coherent { n0, phi } => make_coherent(n0, phi),
            SourceSpec::SqueezedPair { n0, theta } => make_squeezed_pair(n0, theta),
        }
    }
}

fn check_n0(n0: f64) -> Result<()> {
    check_finite("n0", n0)?;
    if n0 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "n0",
            value: n0,
            reason: "mean photon number must be non-negative",
        });
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    check_finite("gamma", gamma)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "coherence magnitude must lie in [0, 1]",
        });
    }
    Ok(())
}

fn set_block(m: &mut Mat4, row: usize, col: usize, b: &Mat2) {
    m.fixed_view_mut::<2, 2>(2 * row, 2 * col).copy_from(b);
}

/// Correlated thermal state. The off-diagonal block
/// `2N₀γ [[cos φ, sin φ], [-sin φ, cos φ]]` follows from
/// `⟨a₁†a₂⟩ = N₀γe^{iφ}`, `⟨a₁a₂⟩ = 0`.
pub fn make_correlated_thermal(n0: f64, gamma: f64, phi: f64) -> Result<GaussianState> {
    check_n0(n0)?;
    check_gamma(gamma)?;
    check_finite("phi", phi)?;
    let mut cov = Mat4::identity() * (2.0 * n0 + 1.0);
    let c = rotation(phi).transpose() * (2.0 * n0 * gamma);
    set_block(&mut cov, 0, 1, &c);
    set_block(&mut cov, 1, 0, &c.transpose());
    GaussianState::new(Vec4::zeros(), cov)
}

/// Displaced thermal state with `x̄ = 2√(γN₀)(1, 0, cos φ, sin φ)` and
/// `V = [2N₀(1-γ) + 1]𝟙`.
pub fn make_displaced_thermal(n0: f64, gamma: f64, phi: f64) -> Result<GaussianState> {
    check_n0(n0)?;
    check_gamma(gamma)?;
    check_finite("phi", phi)?;
    let amp = 2.0 * (gamma * n0).sqrt();
    let (s, c) = phi.sin_cos();
    let mean = Vec4::new(amp, 0.0, amp * c, amp * s);
    GaussianState::new(mean, Mat4::identity() * (2.0 * n0 * (1.0 - gamma) + 1.0))
}

pub fn make_coherent(n0: f64, phi: f64) -> Result<GaussianState> {
    make_displaced_thermal(n0, 1.0, phi)
}

/// `V = S²(ξ) ⊕ R(θ)S²(ξ)R(θ)ᵀ`, `ξ = asinh √N₀`.
pub fn make_squeezed_pair(n0: f64, theta: f64) -> Result<GaussianState> {
    check_n0(n0)?;
    check_finite("theta", theta)?;
    let xi = n0.sqrt().asinh();
    let s2 = squeeze(2.0 * xi);
    let r = rotation(theta);
    let mut cov = Mat4::zeros();
    set_block(&mut cov, 0, 0, &s2);
    set_block(&mut cov, 1, 1, &(r * s2 * r.transpose()));
    GaussianState::new(Vec4::zeros(), cov)
}

/// `⟨a₁†a₂⟩ / √(⟨a₁†a₁⟩⟨a₂†a₂⟩)` from the first and second moments.
pub fn degree_of_mutual_coherence(state: &GaussianState) -> Result<Complex<f64>> {
    let v = state.cov();
    let x = state.mean();
    for mode in 0..2 {
        if state.photon_number(mode) <= DARK_MODE_THRESHOLD {
            return Err(Error::UndefinedCoherence { mode });
        }
    }
    let fluct = Complex::new(v[(0, 2)] + v[(1, 3)], v[(0, 3)] - v[(1, 2)]) / 4.0;
    let drift = Complex::new(x[0], -x[1]) * Complex::new(x[2], x[3]) / 4.0;
    let norm = (state.photon_number(0) * state.photon_number(1)).sqrt();
    Ok((fluct + drift) / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{is_physical, symplectic_eigenvalues};
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    #[test]
    fn uncorrelated_limits() {
        let s = make_correlated_thermal(2.0, 0.0, 1.0).unwrap();
        assert_eq!(*s.cov(), Mat4::identity() * 5.0);
        let d = make_displaced_thermal(2.0, 0.0, 1.0).unwrap();
        assert_eq!(*d.mean(), Vec4::zeros());
        assert_eq!(
            degree_of_mutual_coherence(&s).unwrap(),
            Complex::new(0.0, 0.0)
        );
    }

    #[test]
    fn correlated_thermal_is_physical_at_full_coherence() {
        let s = make_correlated_thermal(1.0, 1.0, 0.0).unwrap();
        assert!(is_physical(s.cov()).unwrap());
        let (a, b) = symplectic_eigenvalues(s.cov()).unwrap();
        assert_relative_eq!(a, 5.0, epsilon = 1e-12);
        assert_relative_eq!(b, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn both_thermal_families_share_the_coherence() {
        for &(n0, g, phi) in &[(1.0, 0.7, PI / E), (100.0, 0.3, -2.0), (0.1, 1.0, PI)] {
            let want = Complex::from_polar(g, phi);
            let c = degree_of_mutual_coherence(&make_correlated_thermal(n0, g, phi).unwrap())
                .unwrap();
            let d = degree_of_mutual_coherence(&make_displaced_thermal(n0, g, phi).unwrap())
                .unwrap();
            assert!((c - want).norm() < 1e-12);
            assert!((d - want).norm() < 1e-12);
        }
    }

    #[test]
    fn displaced_thermal_photon_budget() {
        for &(g, phi) in &[(0.0, 0.0), (0.4, 1.0), (1.0, -2.5)] {
            let s = make_displaced_thermal(3.0, g, phi).unwrap();
            assert_relative_eq!(s.photon_number(0), 3.0, epsilon = 1e-13);
            assert_relative_eq!(s.photon_number(1), 3.0, epsilon = 1e-13);
        }
        let c = make_coherent(4.0, 0.0).unwrap();
        assert_eq!(*c.cov(), Mat4::identity());
        assert_relative_eq!(*c.mean(), Vec4::new(4.0, 0.0, 4.0, 0.0));
    }

    #[test]
    fn squeezed_pair_shapes() {
        assert_relative_eq!(
            *make_squeezed_pair(0.0, 1.0).unwrap().cov(),
            Mat4::identity(),
            epsilon = 1e-15
        );
        let xi = 1.0f64.asinh();
        let s = make_squeezed_pair(1.0, 0.0).unwrap();
        let d = Vec4::new((-2.0 * xi).exp(), (2.0 * xi).exp(), (-2.0 * xi).exp(), (2.0 * xi).exp());
        assert_relative_eq!(*s.cov(), Mat4::from_diagonal(&d), epsilon = 1e-14);
        let (a, b) = symplectic_eigenvalues(s.cov()).unwrap();
        assert!((a - 1.0).abs() < 1e-10 && (b - 1.0).abs() < 1e-10);
        assert_relative_eq!(s.photon_number(0), 1.0, epsilon = 1e-14);
        let q = make_squeezed_pair(1.0, PI / 2.0).unwrap();
        assert_relative_eq!(q.cov()[(2, 2)], (2.0 * xi).exp(), epsilon = 1e-13);
        assert_relative_eq!(q.cov()[(3, 3)], (-2.0 * xi).exp(), epsilon = 1e-13);
    }

    #[test]
    fn parameter_validation() {
        assert!(make_correlated_thermal(-1.0, 0.5, 0.0).is_err());
        assert!(make_correlated_thermal(1.0, 1.5, 0.0).is_err());
        assert!(make_displaced_thermal(1.0, -0.1, 0.0).is_err());
        assert!(make_squeezed_pair(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn dark_mode_has_no_coherence() {
        let r = degree_of_mutual_coherence(&GaussianState::vacuum());
        assert_eq!(r, Err(Error::UndefinedCoherence { mode: 0 }));
    }

    #[test]
    fn spec_accessors() {
        let s = SourceSpec::SqueezedPair { n0: 1.0, theta: 0.5 };
        assert_eq!(s.name(), "squeezed");
        assert_eq!(s.with_n0(3.0).n0(), 3.0);
        assert_eq!(SourceSpec::Coherent { n0: 1.0, phi: 0.2 }.coherence(), Some((1.0, 0.2)));
    }
}
