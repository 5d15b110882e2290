//! Dynamics of distant resonators dispersively coupled to a common bus
//! resonator.
//!
//! The crate models `n` resonators `R_1..R_n` coupled to a bus `R_0`,
//! derives the dispersive (bus-eliminated) description, propagates pure and
//! mixed states, and measures how well single-photon W-type states are
//! produced under photon loss, coupling inhomogeneity, direct
//! resonator-resonator coupling and noisy initial states.
//!
//! Units: frequencies are configured in GHz/MHz (ordinary frequency) and
//! converted to angular units of rad/μs internally. Decay rates are plain
//! rates in μs⁻¹, so `kappa_mhz = 0.5` is a 2 μs lifetime. Time is in μs.
//!
//! Sweeps run on rayon when the `parallel` feature is on (the default) and
//! fall back to sequential iteration otherwise; see [`parallel::ExecMode`].

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fockspace;
pub mod hamiltonians;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod parallel;

pub use error::{Error, Result};

/// Crate version, recorded in every output manifest.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
