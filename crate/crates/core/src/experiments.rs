//! Parameter sweeps, CSV output and validation suites.
//!
//! A [`SweepSpec`] fixes a source, a channel and a separation grid. Rows are
//! evaluated in parallel and returned in ascending `d`; every number is
//! reported in PSF units (`d/w`, `F·w²`).

use std::f64::consts::{E, FRAC_PI_2, PI};
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ImagingChannel;
use crate::error::{Error, Result};
use crate::oracle::{qfi_finite_difference, ImagingFamily, OracleConfig};
use crate::psf::{self, GaussianPsf};
use crate::qfi::{self, EngineConfig};
use crate::quadrature::{quadrature_oracle, OracleQuantity};
use crate::sources::SourceSpec;
use crate::symplectic::{
    ppt_min_symplectic_eigenvalue, symplectic_eigenvalues, williamson, Mat4,
};
use crate::D_MIN_OVER_W;

/// Version of the sweep configuration and CSV layouts.
pub const FORMAT_VERSION: u32 = 1;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn default_w() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kappa: f64,
    /// PSF width.
    #[serde(default = "default_w")]
    pub w: f64,
}

/// Separation grid, in length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub d_min: f64,
    pub d_max: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.d_min];
        }
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.d_min;
                }
                if i == n - 1 {
                    return self.d_max;
                }
                let t = i as f64 / last;
                if self.log {
                    (self.d_min.ln() + t * (self.d_max / self.d_min).ln()).exp()
                } else {
                    self.d_min + t * (self.d_max - self.d_min)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub source: SourceSpec,
    pub channel: ChannelSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub include_bound: bool,
    /// Evaluate the fidelity oracle on every `stride`-th row.
    #[serde(default)]
    pub oracle_stride: Option<usize>,
}

impl SweepSpec {
    pub fn psf(&self) -> Result<GaussianPsf> {
        GaussianPsf::new(self.channel.w).map_err(invalid)
    }

    /// Checks the spec without evaluating the engine.
    pub fn validate(&self) -> Result<()> {
        let psf = self.psf()?;
        let w = psf.w();
        let g = &self.grid;
        if !(g.d_min.is_finite() && g.d_max.is_finite()) {
            return Err(Error::InvalidSpec("grid bounds must be finite".into()));
        }
        if g.d_min < D_MIN_OVER_W * w * (1.0 - 1e-12) {
            return Err(Error::InvalidSpec(format!(
                "d_min = {} is below {D_MIN_OVER_W}·w = {}",
                g.d_min,
                D_MIN_OVER_W * w
            )));
        }
        if g.points < 2 {
            return Err(Error::InvalidSpec(format!(
                "points = {} but at least 2 are required",
                g.points
            )));
        }
        if g.d_max <= g.d_min {
            return Err(Error::InvalidSpec(format!(
                "d_max = {} must exceed d_min = {}",
                g.d_max, g.d_min
            )));
        }
        if self.oracle_stride == Some(0) {
            return Err(Error::InvalidSpec("oracle stride must be at least 1".into()));
        }
        if !(self.source.n0() > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "n0 = {} must be positive",
                self.source.n0()
            )));
        }
        self.source.state().map_err(invalid)?;
        // δ is largest at d_min, so this also covers the rest of the grid.
        ImagingChannel::new(self.channel.kappa, &psf, g.d_min).map_err(invalid)?;
        Ok(())
    }

    /// `key = value` pairs recorded in the CSV header.
    pub fn parameters(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("source.kind", self.source.name().to_string())];
        match self.source {
            SourceSpec::CorrelatedThermal { n0, gamma, phi }
            | SourceSpec::DisplacedThermal { n0, gamma, phi } => {
                out.push(("source.n0", num(n0)));
                out.push(("source.gamma", num(gamma)));
                out.push(("source.phi", num(phi)));
            }
            SourceSpec::Coherent { n0, phi } => {
                out.push(("source.n0", num(n0)));
                out.push(("source.phi", num(phi)));
            }
            SourceSpec::SqueezedPair { n0, theta } => {
                out.push(("source.n0", num(n0)));
                out.push(("source.theta", num(theta)));
            }
        }
        out.push(("channel.kappa", num(self.channel.kappa)));
        out.push(("channel.w", num(self.channel.w)));
        out.push(("grid.d_min", num(self.grid.d_min)));
        out.push(("grid.d_max", num(self.grid.d_max)));
        out.push(("grid.points", self.grid.points.to_string()));
        out.push(("grid.log", self.grid.log.to_string()));
        out.push(("include_bound", self.include_bound.to_string()));
        out.push((
            "oracle_stride",
            self.oracle_stride.map_or("none".into(), |s| s.to_string()),
        ));
        out
    }
}

fn invalid(e: Error) -> Error {
    match e {
        Error::InvalidSpec(_) => e,
        other => Error::InvalidSpec(other.to_string()),
    }
}

/// Shortest round-trip representation.
fn num(x: f64) -> String {
    format!("{x:?}")
}

/// One grid point, in PSF units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub d_over_w: f64,
    pub f_total: f64,
    pub f_cov: f64,
    pub f_mean: f64,
    pub bound: Option<f64>,
    pub oracle: Option<OracleSample>,
    /// `f_total / N₀`.
    pub per_photon: f64,
}

/// Fidelity-oracle value for a sampled row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleSample {
    /// `F·w²`.
    Value(f64),
    /// The two step levels disagreed by this relative amount.
    Uncertain(f64),
}

impl OracleSample {
    pub fn value(self) -> Option<f64> {
        match self {
            OracleSample::Value(v) => Some(v),
            OracleSample::Uncertain(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

/// Oracle settings for a row at separation `d`: the default step, shrunk so
/// that `d - ε/2` stays well inside the domain.
pub fn sweep_oracle_config(w: f64, d: f64) -> OracleConfig {
    let mut cfg = OracleConfig::for_width(w);
    cfg.step = cfg.step.min(0.2 * d);
    cfg
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, &EngineConfig::default(), None)
}

/// Runs `spec`, optionally on a dedicated pool of `threads` workers.
pub fn run_sweep_with(
    spec: &SweepSpec,
    cfg: &EngineConfig,
    threads: Option<usize>,
) -> Result<SweepResult> {
    spec.validate()?;
    let psf = spec.psf()?;
    let source = spec.source.state()?;
    let grid = spec.grid.points();
    let w2 = psf.w() * psf.w();
    let n0 = spec.source.n0();
    let family = ImagingFamily {
        source: source.clone(),
        kappa: spec.channel.kappa,
        psf,
    };

    let row = |(i, &d): (usize, &f64)| -> Result<SweepRow> {
        let wrap = |e: Error| Error::SweepRow {
            row: i,
            d,
            source: Box::new(e),
        };
        let channel = ImagingChannel::new(spec.channel.kappa, &psf, d).map_err(wrap)?;
        let f = qfi::qfi_for_state(&source, &channel, cfg).map_err(wrap)?;
        let bound = if spec.include_bound {
            Some(qfi::qfi_upper_bound(n0, spec.channel.kappa, &psf, d).map_err(wrap)? * w2)
        } else {
            None
        };
        let oracle = match spec.oracle_stride {
            Some(s) if i % s == 0 => {
                match qfi_finite_difference(&family, d, &sweep_oracle_config(psf.w(), d)) {
                    Ok(v) => Some(OracleSample::Value(v * w2)),
                    Err(Error::OracleUncertain { relative_change }) => {
                        log::warn!("row {i} (d = {d}): oracle uncertain ({relative_change:e})");
                        Some(OracleSample::Uncertain(relative_change))
                    }
                    Err(e) => return Err(wrap(e)),
                }
            }
            _ => None,
        };
        Ok(SweepRow {
            d_over_w: d / psf.w(),
            f_total: f.f_total * w2,
            f_cov: f.f_cov * w2,
            f_mean: f.f_mean * w2,
            bound,
            oracle,
            per_photon: f.f_total * w2 / n0,
        })
    };

    let evaluate = || grid.par_iter().enumerate().map(row).collect::<Result<Vec<_>>>();
    let rows = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidSpec(format!("cannot start {n} worker threads: {e}")))?
            .install(evaluate)?,
        None => evaluate()?,
    };
    Ok(SweepResult { spec: *spec, rows })
}

impl SweepResult {
    pub fn columns(&self) -> Vec<&'static str> {
        let mut c = vec!["d_over_w", "f_total_w2", "f_cov_w2", "f_mean_w2"];
        if self.spec.include_bound {
            c.push("bound_w2");
        }
        if self.spec.oracle_stride.is_some() {
            c.push("oracle_w2");
        }
        c.push("f_total_w2_per_n0");
        c
    }

    /// CSV with a `#` header block. Values carry 17 significant digits; rows
    /// without an oracle sample leave that field empty and rows where the
    /// oracle was inconclusive write `uncertain`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# format_version = {FORMAT_VERSION}")?;
        writeln!(out, "# tool = gaussres {TOOL_VERSION}")?;
        for (k, v) in self.spec.parameters() {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "{}", self.columns().join(","))?;
        let g = |x: f64| format!("{x:.16e}");
        for r in &self.rows {
            let mut fields = vec![g(r.d_over_w), g(r.f_total), g(r.f_cov), g(r.f_mean)];
            if self.spec.include_bound {
                fields.push(r.bound.map(g).unwrap_or_default());
            }
            if self.spec.oracle_stride.is_some() {
                fields.push(match r.oracle {
                    Some(OracleSample::Value(v)) => g(v),
                    Some(OracleSample::Uncertain(_)) => "uncertain".into(),
                    None => String::new(),
                });
            }
            fields.push(g(r.per_photon));
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Named invariant suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Geometry,
    Symplectic,
    Oracle,
    Limits,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Symplectic => "symplectic",
            Suite::Oracle => "oracle",
            Suite::Limits => "limits",
            Suite::All => "all",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "geometry" => Suite::Geometry,
            "symplectic" => Suite::Symplectic,
            "oracle" => Suite::Oracle,
            "limits" => Suite::Limits,
            "all" => Suite::All,
            _ => return Err(Error::InvalidSpec(format!("unknown suite `{s}`"))),
        })
    }
}

/// One line of a validation report: passes when `measured ≤ tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl Check {
    pub fn new(suite: &'static str, name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            note: None,
        }
    }

    fn from_result(
        suite: &'static str,
        name: impl Into<String>,
        measured: Result<f64>,
        tolerance: f64,
    ) -> Self {
        match measured {
            Ok(m) => Self::new(suite, name, m, tolerance),
            Err(e) => Self {
                note: Some(e.to_string()),
                ..Self::new(suite, name, f64::INFINITY, tolerance)
            },
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: measured {:.6e}, tolerance {:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.measured,
            self.tolerance
        )?;
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

pub fn run_validation(suite: Suite) -> ValidationReport {
    run_validation_with(suite, &EngineConfig::default())
}

/// Runs `suite` with the engine configured by `cfg`.
pub fn run_validation_with(suite: Suite, cfg: &EngineConfig) -> ValidationReport {
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Geometry {
        checks.extend(geometry_suite());
    }
    if all || suite == Suite::Symplectic {
        checks.extend(symplectic_suite(cfg));
    }
    if all || suite == Suite::Oracle {
        checks.extend(oracle_suite(cfg));
    }
    if all || suite == Suite::Limits {
        checks.extend(limits_suite(cfg));
    }
    ValidationReport { checks }
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

fn unit_psf() -> GaussianPsf {
    GaussianPsf::new(1.0).expect("unit width is valid")
}

/// One representative of each family, plus both squeezing orientations.
pub fn representative_sources(n0: f64) -> Vec<SourceSpec> {
    vec![
        SourceSpec::CorrelatedThermal {
            n0,
            gamma: 0.7,
            phi: PI / E,
        },
        SourceSpec::DisplacedThermal {
            n0,
            gamma: 0.5,
            phi: 1.0,
        },
        SourceSpec::Coherent { n0, phi: PI / E },
        SourceSpec::SqueezedPair { n0, theta: 0.0 },
        SourceSpec::SqueezedPair {
            n0,
            theta: FRAC_PI_2,
        },
    ]
}

/// Largest relative deviation of the analytic geometry from quadrature.
pub fn geometry_error(psf: &GaussianPsf, d: f64) -> Result<f64> {
    let floor = 1.0 / (psf.w() * psf.w());
    let q = |which| quadrature_oracle(psf, d, which);
    let delta = rel(psf::overlap_delta(psf, d)?, q(OracleQuantity::Delta)?.scalar().unwrap_or(f64::NAN), 1.0);
    let dk2 = rel(
        psf::delta_k_squared(psf),
        q(OracleQuantity::DeltaKSquared)?.scalar().unwrap_or(f64::NAN),
        floor,
    );
    let beta = rel(psf::beta(psf, d)?, q(OracleQuantity::Beta)?.scalar().unwrap_or(f64::NAN), floor);
    let (ep, em) = psf::eta_squared(psf, d)?;
    let (qp, qm) = q(OracleQuantity::Eta)?.pair().unwrap_or((f64::NAN, f64::NAN));
    let eta = rel(ep, qp, floor).max(rel(em, qm, floor));
    Ok([delta, dk2, beta, eta].into_iter().fold(0.0, f64::max))
}

/// Relative deviation of the analytic `(∂V, ∂x̄)` from finite differences.
///
/// The moments depend on `d` only through `δ`, so the reference is
/// `(∂V/∂δ)(∂δ/∂d)` with both factors taken by five-point central
/// differences. Differencing `V(d)` directly loses most digits at large `d`,
/// where `∂V` is many orders below `V`.
pub fn derivative_error(source: &SourceSpec, kappa: f64, psf: &GaussianPsf, d: f64) -> Result<(f64, f64)> {
    let state = source.state()?;
    let g = psf::mode_geometry(psf, d)?;
    let five_point = |f0: f64, f1: f64, f2: f64, f3: f64, h: f64| (f0 - f3 + 8.0 * (f2 - f1)) / (12.0 * h);

    let hd = (1e-3 * psf.w()).min(0.25 * d);
    let dl = |x: f64| psf::overlap_delta(psf, x);
    let ddelta = five_point(dl(d - 2.0 * hd)?, dl(d - hd)?, dl(d + hd)?, dl(d + 2.0 * hd)?, hd);

    let h = (1e-2 * g.one_minus_delta).min(1e-3);
    let at = |s: f64| {
        let mut shifted = g;
        shifted.delta += s;
        shifted.one_minus_delta -= s;
        ImagingChannel::from_geometry(kappa, shifted)?.propagate(&state)
    };
    let (m2, m1, p1, p2) = (at(-2.0 * h)?, at(-h)?, at(h)?, at(2.0 * h)?);
    let fd_v = (m2.cov() - p2.cov() + 8.0 * (p1.cov() - m1.cov())) * (ddelta / (12.0 * h));
    let fd_x = (m2.mean() - p2.mean() + 8.0 * (p1.mean() - m1.mean())) * (ddelta / (12.0 * h));
    let (dv, dx) = ImagingChannel::new(kappa, psf, d)?.propagate_derivatives(&state);
    let floor = 1e-6 * kappa / psf.w();
    let ev = (dv - fd_v).norm() / dv.norm().max(floor);
    let ex = (dx - fd_x).norm() / dx.norm().max(floor * (1.0 + source.n0()).sqrt());
    Ok((ev, ex))
}

fn geometry_suite() -> Vec<Check> {
    const S: &str = "geometry";
    let mut out = Vec::new();
    for w in [1.0, 0.37] {
        let psf = GaussianPsf::new(w).expect("positive width");
        for dw in [0.05, 0.2, 1.0, 3.0, 6.0] {
            out.push(Check::from_result(
                S,
                format!("analytic vs quadrature, w = {w}, d/w = {dw}"),
                geometry_error(&psf, dw * w),
                1e-6,
            ));
        }
    }
    let psf = unit_psf();
    for source in representative_sources(1.0) {
        for kappa in [0.01, 0.1] {
            let mut worst = Ok(0.0f64);
            for dw in [0.01, 0.2, 0.5, 1.0, 2.0, 5.0] {
                worst = worst.and_then(|m| {
                    derivative_error(&source, kappa, &psf, dw).map(|(a, b)| m.max(a).max(b))
                });
            }
            out.push(Check::from_result(
                S,
                format!("∂V, ∂x̄ vs finite differences, {}, κ = {kappa}", source.name()),
                worst,
                1e-6,
            ));
        }
    }
    out
}

fn symplectic_suite(cfg: &EngineConfig) -> Vec<Check> {
    use rand::SeedableRng;
    const S: &str = "symplectic";
    let _ = cfg;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut recon: Result<f64> = Ok(0.0);
    let mut invariance: Result<f64> = Ok(0.0);
    for _ in 0..200 {
        let v = fixtures::random_covariance(&mut rng);
        recon = recon.and_then(|m| williamson_error(&v).map(|e| m.max(e)));
        let s = fixtures::random_symplectic(&mut rng, 0.5);
        let moved = s * v * s.transpose();
        invariance = invariance.and_then(|m| {
            let (a, b) = symplectic_eigenvalues(&v)?;
            let (c, d) = symplectic_eigenvalues(&moved)?;
            Ok(m.max(rel(c, a, 1.0)).max(rel(d, b, 1.0)))
        });
    }
    let mut out = vec![
        Check::from_result(S, "Williamson reconstruction, 200 random covariances", recon, 1e-10),
        Check::from_result(S, "symplectic spectrum invariance under S V Sᵀ", invariance, 1e-9),
    ];

    let mut unphysical = 0usize;
    for n0 in [0.0, 0.1, 1.0, 100.0] {
        for source in representative_sources(n0) {
            if source.state().is_err() {
                unphysical += 1;
            }
        }
    }
    out.push(Check::new(S, "factory states are physical", unphysical as f64, 0.0));

    let psf = unit_psf();
    for kappa in [0.01, 0.1] {
        let squeezed = SourceSpec::SqueezedPair {
            n0: 1.0,
            theta: FRAC_PI_2,
        };
        let mut worst: Result<f64> = Ok(0.0);
        for dw in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
            worst = worst.and_then(|m| {
                let image = ImagingChannel::new(kappa, &psf, dw)?.propagate(&squeezed.state()?)?;
                Ok(m.max(ppt_min_symplectic_eigenvalue(image.cov())?))
            });
        }
        out.push(Check::from_result(
            S,
            format!("squeezed θ = π/2 stays entangled in the image plane (max ν̃), κ = {kappa}"),
            worst,
            1.0 - 1e-12,
        ));
    }
    out
}

/// Relative Frobenius error of `S D Sᵀ` against `v`.
pub fn williamson_error(v: &Mat4) -> Result<f64> {
    let w = williamson(v)?;
    Ok((w.reconstruct() - v).norm() / v.norm())
}

/// `|engine - oracle| / max(|oracle|, 1e-4/w²)`: below `1e-4` means agreement
/// to `1e-4` relative or `1e-8/w²` absolute.
pub fn oracle_discrepancy(
    source: &SourceSpec,
    kappa: f64,
    psf: &GaussianPsf,
    d: f64,
    cfg: &EngineConfig,
) -> Result<f64> {
    let engine = qfi::qfi_with(source, kappa, psf, d, cfg)?.f_total;
    let family = ImagingFamily {
        source: source.state()?,
        kappa,
        psf: *psf,
    };
    let oracle = qfi_finite_difference(&family, d, &sweep_oracle_config(psf.w(), d))?;
    Ok(rel(engine, oracle, 1e-4 / (psf.w() * psf.w())))
}

fn oracle_suite(cfg: &EngineConfig) -> Vec<Check> {
    const S: &str = "oracle";
    let psf = unit_psf();
    let mut out = Vec::new();

    let self_check: Result<f64> = [0.2, 1.0, 2.0].iter().try_fold(0.0f64, |m, &d| {
        let family = ImagingFamily {
            source: SourceSpec::Coherent { n0: 1.0, phi: PI }.state()?,
            kappa: 0.01,
            psf,
        };
        let o = qfi_finite_difference(&family, d, &OracleConfig::default())?;
        let c = qfi::qfi_coherent_closed_form(1.0, 0.01, PI, &psf, d)?;
        Ok(m.max(rel(o, c, 0.0)))
    });
    out.push(Check::from_result(S, "oracle vs coherent closed form", self_check, 1e-5));

    for source in representative_sources(1.0) {
        let label = match source {
            SourceSpec::SqueezedPair { theta, .. } if theta != 0.0 => "squeezed θ = π/2".to_string(),
            SourceSpec::SqueezedPair { .. } => "squeezed θ = 0".to_string(),
            s => s.name().to_string(),
        };
        let points: Vec<(f64, f64, f64)> = [0.01, 0.1]
            .iter()
            .flat_map(|&k| {
                [0.1, 1.0, 100.0]
                    .iter()
                    .flat_map(move |&n| [0.2, 0.5, 1.0, 2.0, 5.0].map(|d| (k, n, d)))
            })
            .collect();
        let worst = points
            .par_iter()
            .map(|&(kappa, n0, d)| oracle_discrepancy(&source.with_n0(n0), kappa, &psf, d, cfg))
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().fold(0.0, f64::max));
        out.push(Check::from_result(
            S,
            format!("engine vs fidelity oracle, {label}, {} points", points.len()),
            worst,
            1e-4,
        ));
    }
    out
}

/// Relative deviation from the small-separation limit at `d = 1e-3 w`. Where
/// the limit is exactly zero the deviation is taken relative to `2κN₀/w²`.
pub fn small_d_error(source: &SourceSpec, kappa: f64, psf: &GaussianPsf, cfg: &EngineConfig) -> Result<f64> {
    let (gamma, phi) = source.coherence().ok_or(Error::InvalidParameter {
        name: "source",
        value: f64::NAN,
        reason: "small-separation limit needs a coherence parameter",
    })?;
    let n0 = source.n0();
    let f = qfi::qfi_with(source, kappa, psf, D_MIN_OVER_W * psf.w(), cfg)?.f_total;
    let limit = qfi::qfi_small_d_limit(n0, kappa, gamma, phi, psf);
    let scale = qfi::qfi_small_d_limit(n0, kappa, 0.0, 0.0, psf);
    Ok((f - limit).abs() / if limit == 0.0 { scale } else { limit.abs() })
}

/// Relative deviation from `2κN₀/w²` at `d = 8w`.
pub fn large_d_error(source: &SourceSpec, kappa: f64, psf: &GaussianPsf, cfg: &EngineConfig) -> Result<f64> {
    let f = qfi::qfi_with(source, kappa, psf, 8.0 * psf.w(), cfg)?.f_total;
    let limit = qfi::qfi_small_d_limit(source.n0(), kappa, 0.0, 0.0, psf);
    Ok(rel(f, limit, 0.0))
}

fn limits_suite(cfg: &EngineConfig) -> Vec<Check> {
    const S: &str = "limits";
    let psf = unit_psf();
    let mut out = Vec::new();
    for gamma in [0.0, 0.7, 1.0] {
        for (phi, pname) in [(0.0, "0"), (PI / E, "π/e"), (PI, "π")] {
            for source in [
                SourceSpec::CorrelatedThermal { n0: 1.0, gamma, phi },
                SourceSpec::DisplacedThermal { n0: 1.0, gamma, phi },
            ] {
                out.push(Check::from_result(
                    S,
                    format!(
                        "d → 0 limit 2κN₀(1 - γ cos φ)/w², {}, γ = {gamma}, φ = {pname}",
                        source.name()
                    ),
                    small_d_error(&source, 0.01, &psf, cfg),
                    1e-3,
                ));
            }
        }
    }
    for source in representative_sources(1.0) {
        out.push(Check::from_result(
            S,
            format!("d = 8w limit 2κN₀/w², {}", source.name()),
            large_d_error(&source, 0.01, &psf, cfg),
            5e-3,
        ));
    }

    let coherent: Result<f64> = (|| {
        let mut m = 0.0f64;
        for phi in [0.0, PI / E, PI] {
            for i in 0..20 {
                let d = 0.05 + i as f64 * (5.0 - 0.05) / 19.0;
                let f = qfi::qfi_with(&SourceSpec::Coherent { n0: 1.0, phi }, 0.1, &psf, d, cfg)?;
                let c = qfi::qfi_coherent_closed_form(1.0, 0.1, phi, &psf, d)?;
                m = m.max(rel(f.f_total, c, 0.0));
            }
        }
        Ok(m)
    })();
    out.push(Check::from_result(S, "coherent engine vs closed form", coherent, 1e-8));

    let dominance: Result<f64> = (|| {
        let mut m = f64::NEG_INFINITY;
        for source in representative_sources(1.0) {
            for kappa in [0.01, 0.1] {
                for d in [0.01, 0.2, 0.7, 1.5, 4.0] {
                    let f = qfi::qfi_with(&source, kappa, &psf, d, cfg)?.f_total;
                    let b = qfi::qfi_upper_bound(source.n0(), kappa, &psf, d)?;
                    m = m.max(f / b - 1.0);
                }
            }
        }
        Ok(m)
    })();
    out.push(Check::from_result(S, "QFI ≤ upper bound (max F/bound - 1)", dominance, 1e-9));
    out
}

/// Random physical covariances and symplectic matrices for tests.
pub mod fixtures {
    use nalgebra::Vector4;
    use rand::Rng;

    use crate::symplectic::{omega, Mat4};

    /// `exp(ΩH)` for a random symmetric `H` with entries in `[-scale, scale]`.
    pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Mat4 {
        let mut h = Mat4::zeros();
        for i in 0..4 {
            for j in i..4 {
                let x = rng.random_range(-scale..=scale);
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        (omega() * h).exp()
    }

    /// `S diag(ν₁, ν₁, ν₂, ν₂) Sᵀ` with `ν ∈ [1, 6)`.
    pub fn random_covariance<R: Rng + ?Sized>(rng: &mut R) -> Mat4 {
        let s = random_symplectic(rng, 0.5);
        let a = 1.0 + 5.0 * rng.random::<f64>();
        let b = 1.0 + 5.0 * rng.random::<f64>();
        let v = s * Mat4::from_diagonal(&Vector4::new(a, a, b, b)) * s.transpose();
        (v + v.transpose()) / 2.0
    }
}
