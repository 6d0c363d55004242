//! Connectivity-based, range-free localization for wireless sensor
//! networks.
//!
//! Dumb nodes score every beacon they hear by the fraction of its periodic
//! transmissions they receive, estimate their position as a factor-weighted
//! fusion of per-band beacon centroids, and then act as beacons for their
//! neighbors. The crate provides the field simulator ([`field`], [`radio`]),
//! the estimator ([`localize`]), the evaluation metrics ([`metrics`]) and an
//! experiment harness with CSV output ([`harness`]).

pub mod error;
pub mod field;
pub mod harness;
pub mod localize;
pub mod metrics;
pub mod radio;
pub mod rng;

pub use error::{Error, Result};
pub use field::{ConnectivityGraph, FieldConfig, Node, Position, Role};
pub use localize::{LocalizationOutcome, ProximityRecord, RoundParams, ThresholdScheme};
pub use radio::{ReceptionModel, SamplingParams};
