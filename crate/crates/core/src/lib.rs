//! Second-order (dispersion) analysis of nearest-neighbor decoding with
//! Gaussian codebooks over additive non-Gaussian noise and interference.
//!
//! The crate has three layers:
//!
//! * closed forms: [`analytics`] for capacity, dispersions and the normal
//!   approximation, [`delta_method`] for the variance of the decoding
//!   statistic;
//! * exact conditional error probabilities over the codebook ensemble in
//!   [`exact_error`];
//! * simulation in [`montecarlo`], driven by [`noise`] laws and
//!   [`sampling`] ensembles, with reproducible per-trial random streams.
//!
//! Noise laws, codebook ensembles and error estimators are each looked up by
//! name through a [`registry::Registry`], so new variants plug in without
//! touching the simulators.

pub mod analytics;
pub mod delta_method;
pub mod error;
pub mod exact_error;
pub mod montecarlo;
pub mod noise;
pub mod parallel;
pub mod registry;
pub mod rng;
pub mod sampling;
pub mod special;
pub mod sweep;

pub use analytics::DispersionReport;
pub use error::{Error, Result};
pub use exact_error::{EmpiricalPowers, ExponentResult};
pub use montecarlo::{MCEstimate, Method, Scenario};
pub use noise::{NoiseModel, NoiseMoments};
pub use rng::RandomStream;
pub use sampling::CodebookKind;
pub use sweep::SweepTable;
