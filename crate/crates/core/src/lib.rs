//! Simulation and closed-form analysis of verified logical cluster states
//! built from Steane-code blocks.
//!
//! Two engines share one circuit model: an exact stabilizer tableau
//! ([`tableau`]) that serves as the oracle, and a Pauli-frame sampler
//! ([`frame`]) for Monte Carlo throughput. [`protocols`] builds the
//! verification, star-assembly and connection circuits on top of them,
//! [`estimators`] turns trials into rates with Wilson intervals, and
//! [`analytic`] evaluates the closed-form error and resource model.

pub mod analytic;
pub mod circuit;
pub mod cli;
pub mod clifford;
pub mod error;
pub mod estimators;
pub mod frame;
pub mod gf2;
pub mod noise;
pub mod pauli;
pub mod protocols;
pub mod scalar;
pub mod selftest;
pub mod steane;
pub mod tableau;

pub use error::{Error, Result};

pub type AnalyticModel64 = analytic::AnalyticModel<f64>;
pub type AnalyticModel32 = analytic::AnalyticModel<f32>;
pub type ThresholdReport64 = analytic::ThresholdReport<f64>;
pub type ThresholdReport32 = analytic::ThresholdReport<f32>;
pub type ResourceEstimate64 = analytic::ResourceEstimate<f64>;
pub type ResourceEstimate32 = analytic::ResourceEstimate<f32>;
pub type RateEstimate64 = estimators::RateEstimate<f64>;
pub type RateEstimate32 = estimators::RateEstimate<f32>;
