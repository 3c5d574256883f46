//! Independent 2D-quadrature evaluation of the PSF geometry.
//!
//! Integrals are taken over `[-L, L]²`, `L = d/2 + 8w`, on a Gauss–Legendre
//! tensor grid whose size is doubled until two successive estimates agree.

use crate::error::{Error, Result};
use crate::psf::Psf;

/// Which defining integral to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleQuantity {
    Delta,
    DeltaKSquared,
    Beta,
    Eta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleValue {
    Scalar(f64),
    /// `(η₊², η₋²)`.
    Pair(f64, f64),
}

impl OracleValue {
    pub fn scalar(self) -> Option<f64> {
        match self {
            OracleValue::Scalar(v) => Some(v),
            OracleValue::Pair(..) => None,
        }
    }

    pub fn pair(self) -> Option<(f64, f64)> {
        match self {
            OracleValue::Pair(a, b) => Some((a, b)),
            OracleValue::Scalar(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub start_nodes: usize,
    pub max_nodes: usize,
    pub rel_tol: f64,
    /// Finite-difference step for `∂u±/∂d`, in units of the PSF width.
    pub fd_step: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            start_nodes: 32,
            max_nodes: 1024,
            rel_tol: 1e-9,
            fd_step: 1e-5,
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    fn new(n: usize, half_width: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        Self {
            nodes: x.iter().map(|v| v * half_width).collect(),
            weights: w.iter().map(|v| v * half_width).collect(),
        }
    }

    fn integrate<const K: usize>(&self, f: impl Fn(f64, f64) -> [f64; K]) -> [f64; K] {
        let mut acc = [0.0; K];
        for (&x, &wx) in self.nodes.iter().zip(&self.weights) {
            for (&y, &wy) in self.nodes.iter().zip(&self.weights) {
                let v = f(x, y);
                for k in 0..K {
                    acc[k] += wx * wy * v[k];
                }
            }
        }
        acc
    }
}

/// Evaluates `which` at separation `d` with the default configuration.
pub fn quadrature_oracle<P: Psf>(psf: &P, d: f64, which: OracleQuantity) -> Result<OracleValue> {
    quadrature_oracle_with(psf, d, which, &QuadratureConfig::default())
}

pub fn quadrature_oracle_with<P: Psf>(
    psf: &P,
    d: f64,
    which: OracleQuantity,
    cfg: &QuadratureConfig,
) -> Result<OracleValue> {
    let w = psf.width();
    let strict = which == OracleQuantity::Eta;
    if !d.is_finite() || d < 0.0 || (strict && d == 0.0) {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d,
            reason: "separation out of range for the quadrature oracle",
        });
    }
    let half = d / 2.0 + 8.0 * w;
    // Absolute floor so that quantities with a root still converge.
    let scale = match which {
        OracleQuantity::Delta => 1.0,
        _ => 1.0 / (w * w),
    };
    // Very coarse grids can miss the integrand entirely and agree on zero.
    let mut n = cfg.start_nodes.max(16);
    let mut prev = evaluate(psf, d, which, &Grid::new(n, half), cfg.fd_step * w);
    loop {
        let next_n = n * 2;
        if next_n > cfg.max_nodes {
            return Err(Error::QuadratureNotConverged {
                nodes: n,
                change: prev.1,
            });
        }
        let mut cur = evaluate(psf, d, which, &Grid::new(next_n, half), cfg.fd_step * w);
        let change = prev
            .0
            .iter()
            .zip(&cur.0)
            .map(|(a, b)| (a - b).abs() / b.abs().max(scale))
            .fold(0.0, f64::max);
        cur.1 = change;
        if change <= cfg.rel_tol {
            return Ok(match which {
                OracleQuantity::Eta => OracleValue::Pair(cur.0[0], cur.0[1]),
                _ => OracleValue::Scalar(cur.0[0]),
            });
        }
        prev = cur;
        n = next_n;
    }
}

fn evaluate<P: Psf>(psf: &P, d: f64, which: OracleQuantity, grid: &Grid, h: f64) -> (Vec<f64>, f64) {
    let r = d / 2.0;
    let v = match which {
        OracleQuantity::Delta => {
            vec![grid.integrate(|x, y| [psf.value(x - r, y) * psf.value(x + r, y)])[0]]
        }
        OracleQuantity::DeltaKSquared => vec![grid.integrate(|x, y| [psf.dx(x, y).powi(2)])[0]],
        OracleQuantity::Beta => {
            vec![grid.integrate(|x, y| [psf.dx(x - r, y) * psf.dx(x + r, y)])[0]]
        }
        OracleQuantity::Eta => eta_on_grid(psf, d, grid, h).to_vec(),
    };
    (v, f64::INFINITY)
}

/// `∫ |∂u±/∂d|²`, with the mode functions normalised on the same grid and the
/// derivative taken by Richardson-extrapolated central differences.
fn eta_on_grid<P: Psf>(psf: &P, d: f64, grid: &Grid, h: f64) -> [f64; 2] {
    let offsets = [-h, -h / 2.0, h / 2.0, h];
    let raw = |x: f64, y: f64, dd: f64| -> [f64; 2] {
        let a = psf.value(x - dd / 2.0, y);
        let b = psf.value(x + dd / 2.0, y);
        [a + b, a - b]
    };
    let mut norms = [[0.0; 2]; 4];
    for (k, off) in offsets.iter().enumerate() {
        let n2 = grid.integrate(|x, y| {
            let v = raw(x, y, d + off);
            [v[0] * v[0], v[1] * v[1]]
        });
        norms[k] = [n2[0].sqrt(), n2[1].sqrt()];
    }
    grid.integrate(|x, y| {
        let u: [[f64; 2]; 4] = std::array::from_fn(|k| {
            let v = raw(x, y, d + offsets[k]);
            [v[0] / norms[k][0], v[1] / norms[k][1]]
        });
        let mut out = [0.0; 2];
        for s in 0..2 {
            let coarse = (u[3][s] - u[0][s]) / (2.0 * h);
            let fine = (u[2][s] - u[1][s]) / h;
            let der = (4.0 * fine - coarse) / 3.0;
            out[s] = der * der;
        }
        out
    })
}
