//! Quantum-noise spectral densities of a three-mode optomechanical force
//! sensor with asymmetric coupling and optical loss.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] holds the physical inputs, their validation and the derived
//!   quantities (zero-point amplitude, intracavity photon number, thermal
//!   occupancy, regime checks), plus the flat TOML config loader.
//! * [`spectra`] evaluates the per-frequency coefficient algebra and every
//!   analytic spectral density, including the closed-form special cases and
//!   the standard-quantum-limit reference.
//! * [`optimizer`] computes the optimal post-processing weight `y` in closed
//!   form and checks it with a derivative-free simplex search.
//! * [`sqlimit`] holds the standard-quantum-limit benchmark and the minimum
//!   detectable force budget in SI units.
//! * [`oracle`] integrates the linear stochastic quadrature equations exactly
//!   and estimates the spectral density of the post-processed sum, as an
//!   independent check of the analytic spectra.
//! * [`scenario`] names the preset parameter variants (symmetry, loss,
//!   pump level) swept by the command-line tool.

pub mod constants;
mod error;
pub mod optimizer;
pub mod oracle;
pub mod params;
pub mod scenario;
pub mod spectra;
pub mod sqlimit;

pub use error::{Error, Result};
pub use num_complex::Complex64;
