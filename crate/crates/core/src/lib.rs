//! Quantum Cramér–Rao limits for resolving two point sources that emit an
//! arbitrary two-mode Gaussian state.
//!
//! The crate is organised bottom-up:
//!
//! * [`symplectic`]: Gaussian-state algebra, Williamson decomposition and the
//!   PPT entanglement witness.
//! * [`psf`] and [`quadrature`]: separation-dependent geometry of a Gaussian
//!   point-spread function, with an independent quadrature oracle.
//! * [`channel`]: propagation of the source modes to the image plane.
//! * [`sources`]: correlated thermal, displaced thermal, coherent and squeezed
//!   source families.
//! * [`qfi`]: the quantum Fisher information for the separation, its closed
//!   forms, limits and the global upper bound.
//! * [`oracle`]: an independent QFI obtained from finite differences of the
//!   Gaussian fidelity.
//! * [`experiments`]: parameter sweeps, CSV output and validation suites.
//!
//! ```
//! use gaussres::{qfi, GaussianPsf, SourceSpec};
//!
//! let psf = GaussianPsf::new(1.0).unwrap();
//! let source = SourceSpec::Coherent { n0: 1.0, phi: std::f64::consts::PI };
//! let f = qfi::qfi(&source, 0.01, &psf, 0.5).unwrap();
//! let closed = qfi::qfi_coherent_closed_form(1.0, 0.01, std::f64::consts::PI, &psf, 0.5).unwrap();
//! assert!((f.f_total - closed).abs() < 1e-10 * closed);
//! ```

pub mod channel;
pub mod ddfloat;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod oracle;
pub mod psf;
pub mod qfi;
pub mod quadrature;
pub mod sources;
pub mod symplectic;

#[cfg(doctest)]
mod book;

pub use channel::{ImagingChannel, PropagationMatrices};
pub use error::{Error, Result};
pub use oracle::OracleConfig;
pub use psf::{GaussianPsf, ModeGeometry};
pub use qfi::{BasisSet, EngineConfig, QfiBreakdown};
pub use sources::SourceSpec;
pub use symplectic::{GaussianState, SymplecticForm, WilliamsonDecomposition};

/// Smallest separation, in units of the PSF width, handled by the full pipeline.
pub const D_MIN_OVER_W: f64 = 1e-3;
