//! Bounds for differential misclassification of a binary outcome, on the
//! risk-ratio scale.
//!
//! With sensitivities `s_a = P(Y*=1 | Y=1, A=a)` and false-positive
//! probabilities `f_a = P(Y*=1 | Y=0, A=a)` by exposure arm, the observed
//! risk ratio can exceed the true one by at most max(s1/s0, f1/f0) for a
//! causative effect, and fall below it by at most min(s1/s0, f1/f0) for a
//! preventive one. Dividing the observed ratio accordingly bounds the true
//! effect; the forward model generates observed ratios from true parameters
//! so those bounds can be certified numerically.

use serde::{Deserialize, Serialize};

use crate::domain::{EffectDirection, ObservedAssociation, RatioScale, TrueBinaryModel};
use crate::error::{Error, Result};

pub use crate::thresholds::{ci_shift_threshold, explain_away_threshold, shift_threshold};

/// Sensitivity and false-positive probabilities of the outcome measurement,
/// by exposure arm. All four strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OutcomeMisclassificationRaw")]
pub struct OutcomeMisclassification {
    s1: f64,
    s0: f64,
    f1: f64,
    f0: f64,
}

#[derive(Deserialize)]
struct OutcomeMisclassificationRaw {
    s1: f64,
    s0: f64,
    f1: f64,
    f0: f64,
}

impl TryFrom<OutcomeMisclassificationRaw> for OutcomeMisclassification {
    type Error = Error;

    fn try_from(raw: OutcomeMisclassificationRaw) -> Result<Self> {
        OutcomeMisclassification::new(raw.s1, raw.s0, raw.f1, raw.f0)
    }
}

impl OutcomeMisclassification {
    pub fn new(s1: f64, s0: f64, f1: f64, f0: f64) -> Result<Self> {
        for (name, value) in [("s1", s1), ("s0", s0), ("f1", f1), ("f0", f0)] {
            if !(value.is_finite() && value > 0.0 && value < 1.0) {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        Ok(Self { s1, s0, f1, f0 })
    }

    pub fn s1(&self) -> f64 {
        self.s1
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn f1(&self) -> f64 {
        self.f1
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }
}

/// The two risk-ratio-scale direct effects of exposure on the outcome
/// measurement, and their extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDmeComponents {
    sensitivity_ratio: f64,
    false_positive_ratio: f64,
    max_dme: f64,
    min_dme: f64,
}

impl OutcomeDmeComponents {
    pub fn sensitivity_ratio(&self) -> f64 {
        self.sensitivity_ratio
    }

    pub fn false_positive_ratio(&self) -> f64 {
        self.false_positive_ratio
    }

    pub fn max_dme(&self) -> f64 {
        self.max_dme
    }

    pub fn min_dme(&self) -> f64 {
        self.min_dme
    }
}

/// s1/s0 and f1/f0 with their maximum and minimum.
pub fn dme_components_rr(m: &OutcomeMisclassification) -> OutcomeDmeComponents {
    let sensitivity_ratio = m.s1 / m.s0;
    let false_positive_ratio = m.f1 / m.f0;
    OutcomeDmeComponents {
        sensitivity_ratio,
        false_positive_ratio,
        max_dme: sensitivity_ratio.max(false_positive_ratio),
        min_dme: sensitivity_ratio.min(false_positive_ratio),
    }
}

/// Bound on the true risk ratio given the observed one.
///
/// Causative: true RR >= observed / max_dme. Preventive: true RR <=
/// observed / min_dme.
pub fn bound_true_rr(
    observed: &ObservedAssociation,
    components: &OutcomeDmeComponents,
    direction: EffectDirection,
) -> Result<f64> {
    observed.require_scale(RatioScale::RiskRatio)?;
    Ok(match direction {
        EffectDirection::Causative => observed.estimate() / components.max_dme,
        EffectDirection::Preventive => observed.estimate() / components.min_dme,
    })
}

/// Observed risk ratio generated from true parameters by total probability:
/// `p*_a = s_a p_a + f_a (1 - p_a)`.
pub fn forward_observed_rr(
    t: &TrueBinaryModel,
    m: &OutcomeMisclassification,
) -> ObservedAssociation {
    let p1_star = m.s1 * t.p1() + m.f1 * (1.0 - t.p1());
    let p0_star = m.s0 * t.p0() + m.f0 * (1.0 - t.p0());
    ObservedAssociation::new(p1_star / p0_star, RatioScale::RiskRatio)
        .expect("interior parameters yield a positive finite ratio")
}
