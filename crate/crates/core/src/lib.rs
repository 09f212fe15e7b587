//! Multisensor multitarget tracking with random-finite-set filters.
//!
//! This crate implements the general multisensor CPHD filter and its PHD
//! special case on a Gaussian mixture representation, together with the
//! iterated-corrector baselines, a two-step greedy approximation of the
//! combinatorial update (measurement subsets per Gaussian component, then
//! partitions of subsets), exact small-instance enumeration for
//! verification, a seeded scenario simulator and the OSPA error metric.
//!
//! The main entry points are [`filters::predict`] and the per-filter update
//! functions ([`filters::gcphd_update`], [`filters::gphd_update`],
//! [`filters::ic_cphd_update`], [`filters::ic_phd_update`]), or the
//! convenience wrapper [`filters::step`] that dispatches on
//! [`filters::FilterMode`].

pub mod cardinality;
pub mod filters;
pub mod gaussian;
pub mod linalg;
pub mod measurement;
pub mod ospa;
pub mod partition;
pub mod sensor;
pub mod sim;
pub mod update;

use thiserror::Error;

/// Errors produced by filter construction and update operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular covariance")]
    SingularCovariance,
    #[error("bearing undefined: component mean coincides with sensor position")]
    BearingUndefined,
    #[error("enumeration too large: {0} exceeds guard")]
    EnumerationTooLarge(usize),
    #[error("invalid partition for frame")]
    InvalidPartition,
    #[error("subset has more than one measurement from sensor {0}")]
    DuplicateSensor(usize),
    #[error("no feasible explanation of measurements")]
    InfeasibleUpdate,
    #[error("degenerate subset posterior")]
    DegenerateSubsetPosterior,
    #[error("PHD update requires Poisson clutter on every sensor")]
    NonPoissonClutter,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
