//! Explain-away, shift, and confidence-interval thresholds.
//!
//! These are scale-agnostic: the same arithmetic answers "how strong must
//! differential measurement error be" whether the observed association is a
//! risk ratio or an odds ratio. Thresholds are always reported as a factor
//! >= 1 together with the direction the error must act in.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::ObservedAssociation;
use crate::error::{Error, Result};

/// Which way differential error must push the mismeasured ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DmeDirection {
    /// The error ratios must reach at least the threshold factor.
    Inflating,
    /// The error ratios must fall to at most the reciprocal of the factor.
    Deflating,
}

impl fmt::Display for DmeDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DmeDirection::Inflating => write!(f, "inflating"),
            DmeDirection::Deflating => write!(f, "deflating"),
        }
    }
}

/// A minimum strength of differential measurement error, as a factor >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    factor: f64,
    direction: DmeDirection,
}

impl Threshold {
    fn from_ratio(ratio: f64) -> Self {
        if ratio >= 1.0 {
            Self {
                factor: ratio,
                direction: DmeDirection::Inflating,
            }
        } else {
            Self {
                factor: 1.0 / ratio,
                direction: DmeDirection::Deflating,
            }
        }
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn direction(&self) -> DmeDirection {
        self.direction
    }
}

/// Minimum differential-error strength consistent with a truly null effect:
/// the observed ratio itself, normalized to a factor >= 1.
pub fn explain_away_threshold(observed: &ObservedAssociation) -> Result<Threshold> {
    if observed.estimate() == 1.0 {
        return Err(Error::AlreadyNull);
    }
    Ok(Threshold::from_ratio(observed.estimate()))
}

/// Minimum differential-error strength needed to move the observed estimate
/// to `target`, which must sit between 1 and the estimate (inclusive).
pub fn shift_threshold(observed: &ObservedAssociation, target: f64) -> Result<Threshold> {
    if !target.is_finite() || target <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "target",
            value: target,
            requirement: "must be a finite positive number",
        });
    }
    let estimate = observed.estimate();
    let (side_min, side_max) = if estimate >= 1.0 {
        (1.0, estimate)
    } else {
        (estimate, 1.0)
    };
    if !(side_min <= target && target <= side_max) {
        return Err(Error::TargetBeyondEstimate { estimate, target });
    }
    Ok(Threshold::from_ratio(estimate / target))
}

/// Minimum differential-error strength needed to shift the confidence
/// interval to include 1. Returns 1.0 when the interval already does.
pub fn ci_shift_threshold(observed: &ObservedAssociation) -> Result<f64> {
    let (lower, upper) = observed.ci().ok_or(Error::MissingInterval)?;
    Ok(if lower > 1.0 {
        lower
    } else if upper < 1.0 {
        1.0 / upper
    } else {
        1.0
    })
}
