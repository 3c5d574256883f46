//! Two-mode Gaussian-state algebra.
//!
//! Quadratures are ordered `(q₁, p₁, q₂, p₂)` and normalised so that the
//! vacuum covariance matrix is the identity (`[q, p] = 2i`). Every function in
//! this module is a pure function of its arguments.

use nalgebra::{Complex, DMatrix, Matrix2, Matrix4, SymmetricEigen, Vector4};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<f64>;
pub type Mat4 = Matrix4<f64>;
pub type Vec4 = Vector4<f64>;

/// Absolute tolerance on the eigenvalues of `V + iΩ`.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Largest entrywise asymmetry accepted (and silently removed) on input.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Symplectic eigenvalues closer than this are treated as one degenerate pair.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// The symplectic form `Ω = J ⊕ J`, `J = [[0, 1], [-1, 0]]`.
pub fn omega() -> Mat4 {
    let mut m = Mat4::zeros();
    for b in 0..2 {
        m[(2 * b, 2 * b + 1)] = 1.0;
        m[(2 * b + 1, 2 * b)] = -1.0;
    }
    m
}

/// Wrapper around the fixed two-mode symplectic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticForm {
    pub omega: Mat4,
}

impl SymplecticForm {
    pub fn new() -> Self {
        Self { omega: omega() }
    }

    /// `M Ω Mᵀ`; equals `Ω` iff `M` is symplectic.
    pub fn conjugate(&self, m: &Mat4) -> Mat4 {
        m * self.omega * m.transpose()
    }
}

impl Default for SymplecticForm {
    fn default() -> Self {
        Self::new()
    }
}

/// `Ω` for an arbitrary number of modes.
pub fn omega_n(modes: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * modes, 2 * modes);
    for b in 0..modes {
        m[(2 * b, 2 * b + 1)] = 1.0;
        m[(2 * b + 1, 2 * b)] = -1.0;
    }
    m
}

/// Phase-space rotation `[[cos φ, -sin φ], [sin φ, cos φ]]`.
pub fn rotation(phi: f64) -> Mat2 {
    let (s, c) = phi.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Single-mode squeezer `diag(e^{-ξ}, e^{ξ})`.
pub fn squeeze(xi: f64) -> Mat2 {
    Mat2::new((-xi).exp(), 0.0, 0.0, xi.exp())
}

/// Inverse of a symplectic matrix, `S⁻¹ = -Ω Sᵀ Ω`.
pub fn symplectic_inverse(s: &Mat4) -> Mat4 {
    let om = omega();
    -(om * s.transpose() * om)
}

pub(crate) fn asymmetry(m: &Mat4) -> f64 {
    (m - m.transpose()).abs().max()
}

fn checked_symmetric(cov: &Mat4) -> Result<Mat4> {
    let asym = asymmetry(cov);
    if !cov.iter().all(|x| x.is_finite()) {
        return Err(Error::NotSymmetric { asymmetry: f64::NAN });
    }
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok((cov + cov.transpose()) * 0.5)
}

/// First and second moments of a two-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: Vec4,
    cov: Mat4,
}

impl GaussianState {
    /// Builds a state, symmetrising `cov` and rejecting unphysical moments.
    pub fn new(mean: Vec4, cov: Mat4) -> Result<Self> {
        let cov = checked_symmetric(&cov)?;
        if !mean.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "mean",
                value: f64::NAN,
                reason: "must be finite",
            });
        }
        let min = min_eigenvalue_with_omega(&cov);
        if min < -PHYSICALITY_TOL {
            return Err(Error::Unphysical { min_eigenvalue: min });
        }
        Ok(Self { mean, cov })
    }

    pub fn vacuum() -> Self {
        Self {
            mean: Vec4::zeros(),
            cov: Mat4::identity(),
        }
    }

    pub fn mean(&self) -> &Vec4 {
        &self.mean
    }

    pub fn cov(&self) -> &Mat4 {
        &self.cov
    }

    /// Mean photon number of mode `0` or `1`:
    /// `(V_qq + V_pp - 2)/4 + (q̄² + p̄²)/4`.
    pub fn photon_number(&self, mode: usize) -> f64 {
        assert!(mode < 2, "two-mode state has modes 0 and 1");
        let (q, p) = (2 * mode, 2 * mode + 1);
        (self.cov[(q, q)] + self.cov[(p, p)] - 2.0) / 4.0
            + (self.mean[q].powi(2) + self.mean[p].powi(2)) / 4.0
    }

    pub fn total_photon_number(&self) -> f64 {
        self.photon_number(0) + self.photon_number(1)
    }

    /// Partial transpose on the second mode (`p₂ → -p₂`).
    pub fn partial_transpose(&self) -> Self {
        let flip = Mat4::from_diagonal(&Vec4::new(1.0, 1.0, 1.0, -1.0));
        Self {
            mean: flip * self.mean,
            cov: flip * self.cov * flip,
        }
    }
}

fn min_eigenvalue_with_omega(cov: &Mat4) -> f64 {
    let om = omega();
    let h = Matrix4::from_fn(|i, j| Complex::new(cov[(i, j)], om[(i, j)]));
    SymmetricEigen::new(h).eigenvalues.min()
}

/// Whether `cov` satisfies `V + iΩ ≥ 0` up to [`PHYSICALITY_TOL`].
pub fn is_physical(cov: &Mat4) -> Result<bool> {
    let cov = checked_symmetric(cov)?;
    Ok(min_eigenvalue_with_omega(&cov) >= -PHYSICALITY_TOL)
}

/// Symmetric square root of a positive-definite matrix.
fn spd_sqrt(v: &Mat4) -> Result<Mat4> {
    let eig = SymmetricEigen::new(*v);
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        return Err(Error::Unphysical { min_eigenvalue: min });
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    Ok(eig.eigenvectors * Mat4::from_diagonal(&root) * eig.eigenvectors.transpose())
}

/// Symplectic spectrum from the antisymmetric `K = V^{1/2} Ω V^{1/2}`: the
/// eigenvalues of the Hermitian `iK` are `±ν₊, ±ν₋`.
fn spectrum_of(k: &Mat4) -> Result<(f64, f64)> {
    let h = k.map(|x| Complex::new(0.0, x));
    let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    let scale = e[3].abs().max(1.0);
    let mismatch = ((e[0] + e[3]).abs()).max((e[1] + e[2]).abs()) / scale;
    if mismatch > 1e-8 {
        return Err(Error::DegeneracyBreakdown { mismatch });
    }
    Ok(((e[3] - e[0]) / 2.0, (e[2] - e[1]) / 2.0))
}

/// Symplectic eigenvalues `(ν₊, ν₋)` with `ν₊ ≥ ν₋`.
pub fn symplectic_eigenvalues(cov: &Mat4) -> Result<(f64, f64)> {
    let v = checked_symmetric(cov)?;
    let root = spd_sqrt(&v)?;
    spectrum_of(&(root * omega() * root))
}

/// Smallest symplectic eigenvalue of the partially transposed covariance.
/// Values below one certify two-mode entanglement.
pub fn ppt_min_symplectic_eigenvalue(cov: &Mat4) -> Result<f64> {
    let flip = Mat4::from_diagonal(&Vec4::new(1.0, 1.0, 1.0, -1.0));
    let v = checked_symmetric(cov)?;
    symplectic_eigenvalues(&(flip * v * flip)).map(|(_, low)| low)
}

/// `V = S (ν₊𝟙₂ ⊕ ν₋𝟙₂) Sᵀ` with `S` symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonDecomposition {
    pub s: Mat4,
    pub nu: (f64, f64),
}

impl WilliamsonDecomposition {
    pub fn diagonal(&self) -> Mat4 {
        let (a, b) = self.nu;
        Mat4::from_diagonal(&Vec4::new(a, a, b, b))
    }

    pub fn reconstruct(&self) -> Mat4 {
        self.s * self.diagonal() * self.s.transpose()
    }

    pub fn s_inverse(&self) -> Mat4 {
        symplectic_inverse(&self.s)
    }

    pub fn nu_array(&self) -> [f64; 2] {
        [self.nu.0, self.nu.1]
    }
}

/// Williamson normal form of a physical two-mode covariance matrix.
///
/// With `K = V^{1/2} Ω V^{1/2}` an orthogonal `O` bringing `K` to
/// `⊕ ν_k J` gives `S = V^{1/2} O D^{-1/2}`. The columns of `O` come in pairs
/// `(x, -Kx/ν)`, where `x` is the projection of the standard basis vector with
/// the largest overlap onto the relevant eigenspace of `KᵀK`. That choice makes
/// the output deterministic and reduces to `S = V^{1/2}` whenever `V^{1/2}` is
/// itself symplectic (for instance pure squeezed vacua).
pub fn williamson(cov: &Mat4) -> Result<WilliamsonDecomposition> {
    let v = checked_symmetric(cov)?;
    let root = spd_sqrt(&v)?;
    let k = root * omega() * root;
    let (nu_p, nu_m) = spectrum_of(&k)?;

    let p = k.transpose() * k;
    let eig = SymmetricEigen::new(p);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let column = |i: usize| -> Vec4 { eig.eigenvectors.column(order[i]).into_owned() };

    let degenerate = nu_p - nu_m <= DEGENERACY_TOL * nu_p.max(1.0);
    let upper: Vec<Vec4> = if degenerate {
        (0..4).map(column).collect()
    } else {
        vec![column(0), column(1)]
    };
    let lower: Vec<Vec4> = if degenerate {
        (0..4).map(column).collect()
    } else {
        vec![column(2), column(3)]
    };

    let mut basis: Vec<Vec4> = Vec::with_capacity(4);
    for cluster in [&upper, &lower] {
        let x = canonical_vector(cluster, &basis);
        let mut y = -(k * x);
        for b in &basis {
            y -= b * b.dot(&y);
        }
        y.normalize_mut();
        basis.push(x);
        basis.push(y);
    }
    let o = Mat4::from_columns(&basis);
    let scale = Vec4::new(nu_p, nu_p, nu_m, nu_m).map(|n| 1.0 / n.sqrt());
    let s = root * o * Mat4::from_diagonal(&scale);
    Ok(WilliamsonDecomposition {
        s,
        nu: (nu_p, nu_m),
    })
}

/// Projection of the "most aligned" standard basis vector onto
/// `span(cluster)`, orthogonalised against `taken` and normalised.
fn canonical_vector(cluster: &[Vec4], taken: &[Vec4]) -> Vec4 {
    let mut best = Vec4::zeros();
    let mut best_norm = -1.0;
    for i in 0..4 {
        let mut v = cluster.iter().fold(Vec4::zeros(), |acc, c| acc + c * c[i]);
        for t in taken {
            v -= t * t.dot(&v);
        }
        let n = v.norm();
        if n > best_norm + 1e-12 {
            best = v;
            best_norm = n;
        }
    }
    best / best_norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn block_diag(a: &Mat2, b: &Mat2) -> Mat4 {
        let mut m = Mat4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(b);
        m
    }

    fn beam_splitter(theta: f64) -> Mat4 {
        let (s, c) = theta.sin_cos();
        let mut m = Mat4::zeros();
        for i in 0..2 {
            m[(i, i)] = c;
            m[(i, i + 2)] = s;
            m[(i + 2, i)] = -s;
            m[(i + 2, i + 2)] = c;
        }
        m
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        let om = omega();
        assert_eq!(om * om, -Mat4::identity());
        assert_eq!(om.transpose(), -om);
    }

    #[test]
    fn rotation_and_squeeze_are_symplectic() {
        assert_eq!(rotation(0.0), Mat2::identity());
        assert_eq!(squeeze(0.0), Mat2::identity());
        for &a in &[-2.0, -0.3, 0.7, 1.9, 3.1] {
            assert_relative_eq!(rotation(a).determinant(), 1.0, epsilon = 1e-14);
            assert_relative_eq!(squeeze(a).determinant(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn physicality_of_simple_states() {
        assert!(is_physical(&Mat4::identity()).unwrap());
        assert!(!is_physical(&(Mat4::identity() * 0.5)).unwrap());
        let mut bad = Mat4::identity();
        bad[(0, 1)] = 0.1;
        assert!(matches!(
            is_physical(&bad),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn thermal_modes_have_nu_two_n_plus_one() {
        let v = Mat4::from_diagonal(&Vec4::new(3.0, 3.0, 5.0, 5.0));
        let (a, b) = symplectic_eigenvalues(&v).unwrap();
        assert_relative_eq!(a, 5.0, epsilon = 1e-12);
        assert_relative_eq!(b, 3.0, epsilon = 1e-12);
        assert_eq!(symplectic_eigenvalues(&Mat4::identity()).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn vacuum_williamson_is_trivial() {
        let w = williamson(&Mat4::identity()).unwrap();
        assert_relative_eq!(w.s, Mat4::identity(), epsilon = 1e-14);
        assert_eq!(w.nu, (1.0, 1.0));
    }

    #[test]
    fn squeezed_vacuum_recovers_squeezer() {
        let xi = 0.5;
        let sq = squeeze(xi);
        let v = block_diag(&(sq * sq), &Mat2::identity());
        let w = williamson(&v).unwrap();
        assert_relative_eq!(w.nu.0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.nu.1, 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.s, block_diag(&sq, &Mat2::identity()), epsilon = 1e-12);
    }

    #[test]
    fn williamson_is_deterministic_and_symplectic() {
        let s0 = block_diag(&squeeze(0.4), &(rotation(0.3) * squeeze(-0.2)))
            * beam_splitter(0.7)
            * block_diag(&rotation(1.1), &squeeze(0.9));
        let d = Mat4::from_diagonal(&Vec4::new(2.5, 2.5, 1.3, 1.3));
        let v = s0 * d * s0.transpose();
        let a = williamson(&v).unwrap();
        let b = williamson(&v).unwrap();
        assert_eq!(a, b);
        assert_relative_eq!(a.nu.0, 2.5, epsilon = 1e-10);
        assert_relative_eq!(a.nu.1, 1.3, epsilon = 1e-10);
        assert_relative_eq!(a.s * omega() * a.s.transpose(), omega(), epsilon = 1e-10);
        assert_relative_eq!(a.reconstruct(), v, epsilon = 1e-10, max_relative = 1e-10);
        assert_relative_eq!(a.s_inverse() * a.s, Mat4::identity(), epsilon = 1e-10);
    }

    #[test]
    fn degenerate_spectrum_still_decomposes() {
        let s0 = beam_splitter(0.4) * block_diag(&squeeze(0.6), &squeeze(-0.3));
        let v = s0 * s0.transpose() * 2.0;
        let w = williamson(&v).unwrap();
        assert_relative_eq!(w.nu.0, 2.0, epsilon = 1e-10);
        assert_relative_eq!(w.nu.1, 2.0, epsilon = 1e-10);
        assert_relative_eq!(w.s * omega() * w.s.transpose(), omega(), epsilon = 1e-10);
        assert_relative_eq!(w.reconstruct(), v, epsilon = 1e-10);
    }

    #[test]
    fn ppt_of_separable_states() {
        assert_relative_eq!(
            ppt_min_symplectic_eigenvalue(&Mat4::identity()).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let v = Mat4::from_diagonal(&Vec4::new(3.0, 3.0, 1.5, 1.5));
        assert!(ppt_min_symplectic_eigenvalue(&v).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn two_mode_squeezed_vacuum_is_entangled() {
        let r: f64 = 0.4;
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let mut v = Mat4::identity() * c;
        v[(0, 2)] = s;
        v[(2, 0)] = s;
        v[(1, 3)] = -s;
        v[(3, 1)] = -s;
        let nu = ppt_min_symplectic_eigenvalue(&v).unwrap();
        assert_relative_eq!(nu, (-2.0 * r).exp(), epsilon = 1e-12);
    }

    #[test]
    fn photon_number_bookkeeping() {
        let mean = Vec4::new(2.0, 0.0, 0.0, 0.0);
        let cov = Mat4::from_diagonal(&Vec4::new(3.0, 3.0, 1.0, 1.0));
        let st = GaussianState::new(mean, cov).unwrap();
        assert_relative_eq!(st.photon_number(0), 2.0, epsilon = 1e-15);
        assert_relative_eq!(st.photon_number(1), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn constructor_rejects_sub_vacuum_noise() {
        let r = GaussianState::new(Vec4::zeros(), Mat4::identity() * 0.5);
        assert!(matches!(r, Err(Error::Unphysical { .. })));
    }
}
