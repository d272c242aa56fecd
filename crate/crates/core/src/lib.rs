//! Sensitivity analysis for differential measurement error.
//!
//! When error in an outcome measurement depends on the exposure, or error in
//! an exposure measurement depends on the outcome, an observed association
//! can be biased arbitrarily far from the null. This crate computes how
//! strong such differential error would have to be to explain away (or
//! shift) an observed association, bounds the true effect when the error
//! parameters are specified, and applies slope corrections for continuous
//! measurements:
//!
//! - [`outcome`]: binary outcome misclassification on the risk-ratio scale;
//! - [`exposure`]: binary exposure misclassification on the odds-ratio
//!   scale, including the correct/incorrect classification ratios;
//! - [`continuous`]: linear slope corrections for mismeasured continuous
//!   outcomes and exposures;
//! - [`thresholds`]: explain-away, shift, and CI-shift factors;
//! - [`domain`]: validated association types, 2x2 estimators with Wald
//!   limits, and stratified CSV ingestion;
//! - [`oracle`]: a deterministic grid + seeded Monte Carlo harness that
//!   certifies every implemented inequality and round trip against its
//!   forward model;
//! - [`report`]: serializable report documents shared with the CLI.
//!
//! All analysis types are immutable after validation and all operations are
//! pure, so values can be shared and used across threads freely. The
//! verification harness evaluates cases on a rayon pool when the default
//! `parallel` feature is enabled, with reports byte-identical to the
//! sequential fallback.

pub mod continuous;
pub mod domain;
pub mod error;
pub mod exposure;
pub mod oracle;
pub mod outcome;
pub mod report;
pub mod thresholds;

pub use error::{Error, Result};
