//! Bounds for differential misclassification of a binary exposure, on the
//! odds-ratio scale.
//!
//! Here the outcome can distort how the exposure is recorded, as in
//! retrospective self-report. With sensitivities `s_y = P(A*=1 | Y=y, A=1)`
//! and false-positive probabilities `f_y = P(A*=1 | Y=y, A=0)` by outcome
//! status, four ratios cap the bias: the odds ratio of the outcome's effect
//! on the measurement among the truly exposed, the same among the truly
//! unexposed, and the correct/incorrect classification ratios r_c and r_i.
//! Dividing the observed odds ratio by the largest (causative) or smallest
//! (preventive) of the four bounds the true odds ratio.
//!
//! The forward model closes the joint distribution of (A, Y, A*) with an
//! exposure prevalence and recovers the observed odds ratio by Bayes
//! inversion, which is what the verification harness sweeps.

use serde::{Deserialize, Serialize};

use crate::domain::{odds, EffectDirection, ObservedAssociation, RatioScale, TrueBinaryModel};
use crate::error::{Error, Result};

pub use crate::thresholds::{
    ci_shift_threshold as ci_shift_threshold_or, explain_away_threshold as explain_away_threshold_or,
    shift_threshold as shift_threshold_or,
};

/// Sensitivity and false-positive probabilities of the exposure measurement,
/// by outcome status. All four strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExposureMisclassificationRaw")]
pub struct ExposureMisclassification {
    s1: f64,
    s0: f64,
    f1: f64,
    f0: f64,
}

#[derive(Deserialize)]
struct ExposureMisclassificationRaw {
    s1: f64,
    s0: f64,
    f1: f64,
    f0: f64,
}

impl TryFrom<ExposureMisclassificationRaw> for ExposureMisclassification {
    type Error = Error;

    fn try_from(raw: ExposureMisclassificationRaw) -> Result<Self> {
        ExposureMisclassification::new(raw.s1, raw.s0, raw.f1, raw.f0)
    }
}

impl ExposureMisclassification {
    /// `s1`/`s0` are sensitivities of the exposure measurement when the
    /// outcome is present/absent; `f1`/`f0` the false-positive probabilities.
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

/// The four ratio-scale effects of the outcome on the exposure measurement,
/// and their extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureDmeComponents {
    or_sensitivity: f64,
    or_false_positive: f64,
    r_correct: f64,
    r_incorrect: f64,
    max_dme: f64,
    min_dme: f64,
}

impl ExposureDmeComponents {
    /// odds(s1)/odds(s0): effect of the outcome on the measurement among the
    /// truly exposed.
    pub fn or_sensitivity(&self) -> f64 {
        self.or_sensitivity
    }

    /// odds(f1)/odds(f0): the same among the truly unexposed.
    pub fn or_false_positive(&self) -> f64 {
        self.or_false_positive
    }

    /// (s1/s0) / ((1-f1)/(1-f0)): how much more the outcome promotes correct
    /// classification when the exposure is present versus absent.
    pub fn r_correct(&self) -> f64 {
        self.r_correct
    }

    /// (f1/f0) / ((1-s1)/(1-s0)): how much more the outcome promotes
    /// incorrect classification when the exposure is present versus absent.
    pub fn r_incorrect(&self) -> f64 {
        self.r_incorrect
    }

    pub fn max_dme(&self) -> f64 {
        self.max_dme
    }

    pub fn min_dme(&self) -> f64 {
        self.min_dme
    }

    /// True when a classification ratio exceeds both measurement odds
    /// ratios, so explain-away thresholds speak to max_dme rather than to
    /// the two odds ratios alone. Advisory, never a precondition.
    pub fn classification_ratio_dominates(&self) -> bool {
        self.r_correct.max(self.r_incorrect) > self.or_sensitivity.max(self.or_false_positive)
    }
}

/// All four components with their maximum and minimum.
pub fn dme_components_or(m: &ExposureMisclassification) -> ExposureDmeComponents {
    let or_sensitivity = odds(m.s1) / odds(m.s0);
    let or_false_positive = odds(m.f1) / odds(m.f0);
    let r_correct = (m.s1 / m.s0) / ((1.0 - m.f1) / (1.0 - m.f0));
    let r_incorrect = (m.f1 / m.f0) / ((1.0 - m.s1) / (1.0 - m.s0));
    let max_dme = or_sensitivity
        .max(or_false_positive)
        .max(r_correct)
        .max(r_incorrect);
    let min_dme = or_sensitivity
        .min(or_false_positive)
        .min(r_correct)
        .min(r_incorrect);
    ExposureDmeComponents {
        or_sensitivity,
        or_false_positive,
        r_correct,
        r_incorrect,
        max_dme,
        min_dme,
    }
}

/// Bound on the true odds ratio given the observed one.
///
/// Causative: true OR >= observed / max_dme. Preventive: true OR <=
/// observed / min_dme.
pub fn bound_true_or(
    observed: &ObservedAssociation,
    components: &ExposureDmeComponents,
    direction: EffectDirection,
) -> Result<f64> {
    observed.require_scale(RatioScale::OddsRatio)?;
    Ok(match direction {
        EffectDirection::Causative => observed.estimate() / components.max_dme,
        EffectDirection::Preventive => observed.estimate() / components.min_dme,
    })
}

/// True stratum parameters plus the exposure prevalence needed to close the
/// joint distribution of (A, Y, A*).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PopulationModelRaw")]
pub struct PopulationModel {
    prevalence: f64,
    outcome: TrueBinaryModel,
}

#[derive(Deserialize)]
struct PopulationModelRaw {
    prevalence: f64,
    outcome: TrueBinaryModel,
}

impl TryFrom<PopulationModelRaw> for PopulationModel {
    type Error = Error;

    fn try_from(raw: PopulationModelRaw) -> Result<Self> {
        PopulationModel::new(raw.prevalence, raw.outcome)
    }
}

impl PopulationModel {
    pub fn new(prevalence: f64, outcome: TrueBinaryModel) -> Result<Self> {
        if !(prevalence.is_finite() && prevalence > 0.0 && prevalence < 1.0) {
            return Err(Error::InvalidProbability {
                name: "prevalence",
                value: prevalence,
            });
        }
        Ok(Self {
            prevalence,
            outcome,
        })
    }

    pub fn prevalence(&self) -> f64 {
        self.prevalence
    }

    pub fn outcome(&self) -> &TrueBinaryModel {
        &self.outcome
    }
}

/// Joint cells of (Y, A*) in the order
/// [P(Y=1,A*=1), P(Y=1,A*=0), P(Y=0,A*=1), P(Y=0,A*=0)].
pub fn joint_observed_cells(p: &PopulationModel, m: &ExposureMisclassification) -> [f64; 4] {
    let pi = p.prevalence;
    let p1 = p.outcome.p1();
    let p0 = p.outcome.p0();
    [
        m.s1 * p1 * pi + m.f1 * p0 * (1.0 - pi),
        (1.0 - m.s1) * p1 * pi + (1.0 - m.f1) * p0 * (1.0 - pi),
        m.s0 * (1.0 - p1) * pi + m.f0 * (1.0 - p0) * (1.0 - pi),
        (1.0 - m.s0) * (1.0 - p1) * pi + (1.0 - m.f0) * (1.0 - p0) * (1.0 - pi),
    ]
}

/// Observed odds ratio between the exposure measurement and the outcome,
/// by Bayes inversion over the joint distribution.
pub fn forward_observed_or(
    p: &PopulationModel,
    m: &ExposureMisclassification,
) -> ObservedAssociation {
    let [y1a1, y1a0, y0a1, y0a0] = joint_observed_cells(p, m);
    let estimate = (y1a1 / y0a1) / (y1a0 / y0a0);
    ObservedAssociation::new(estimate, RatioScale::OddsRatio)
        .expect("interior parameters yield a positive finite ratio")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn worked_misclassification() -> ExposureMisclassification {
        ExposureMisclassification::new(0.9, 0.8, 0.2, 0.1).unwrap()
    }

    fn worked_population() -> PopulationModel {
        PopulationModel::new(0.5, TrueBinaryModel::new(0.5, 0.25).unwrap()).unwrap()
    }

    #[test]
    fn components_worked_example() {
        let c = dme_components_or(&worked_misclassification());
        assert_relative_eq!(c.or_sensitivity(), 2.25, max_relative = 1e-12);
        assert_relative_eq!(c.or_false_positive(), 2.25, max_relative = 1e-12);
        assert_relative_eq!(c.r_correct(), 1.265625, max_relative = 1e-12);
        assert_relative_eq!(c.r_incorrect(), 4.0, max_relative = 1e-12);
        assert_relative_eq!(c.max_dme(), 4.0, max_relative = 1e-12);
        assert!(c.classification_ratio_dominates());
    }

    #[test]
    fn components_nondifferential_are_unity() {
        let m = ExposureMisclassification::new(0.85, 0.85, 0.07, 0.07).unwrap();
        let c = dme_components_or(&m);
        assert_eq!(c.or_sensitivity(), 1.0);
        assert_eq!(c.or_false_positive(), 1.0);
        assert_eq!(c.r_correct(), 1.0);
        assert_eq!(c.r_incorrect(), 1.0);
        assert!(!c.classification_ratio_dominates());
    }

    #[test]
    fn swapping_outcome_labels_inverts_every_component() {
        let c = dme_components_or(&worked_misclassification());
        let swapped = dme_components_or(&ExposureMisclassification::new(0.8, 0.9, 0.1, 0.2).unwrap());
        assert_relative_eq!(swapped.or_sensitivity(), 1.0 / c.or_sensitivity(), max_relative = 1e-12);
        assert_relative_eq!(swapped.or_false_positive(), 1.0 / c.or_false_positive(), max_relative = 1e-12);
        assert_relative_eq!(swapped.r_correct(), 1.0 / c.r_correct(), max_relative = 1e-12);
        assert_relative_eq!(swapped.r_incorrect(), 1.0 / c.r_incorrect(), max_relative = 1e-12);
        assert_relative_eq!(swapped.max_dme(), 1.0 / c.min_dme(), max_relative = 1e-12);
        assert_relative_eq!(swapped.min_dme(), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn forward_model_worked_cells_and_estimate() {
        let cells = joint_observed_cells(&worked_population(), &worked_misclassification());
        assert_relative_eq!(cells[0], 0.25, max_relative = 1e-12);
        assert_relative_eq!(cells[1], 0.125, max_relative = 1e-12);
        assert_relative_eq!(cells[2], 0.2375, max_relative = 1e-12);
        assert_relative_eq!(cells[3], 0.3875, max_relative = 1e-12);

        let observed = forward_observed_or(&worked_population(), &worked_misclassification());
        assert_relative_eq!(observed.estimate(), 3.263157894736842, max_relative = 1e-12);
        assert_eq!(observed.scale(), RatioScale::OddsRatio);
    }

    #[test]
    fn bound_on_the_worked_example_holds() {
        let observed = forward_observed_or(&worked_population(), &worked_misclassification());
        let c = dme_components_or(&worked_misclassification());
        let bound = bound_true_or(&observed, &c, EffectDirection::Causative).unwrap();
        assert_relative_eq!(bound, 0.8157894736842105, max_relative = 1e-12);
        assert!(worked_population().outcome().odds_ratio() >= bound);
    }

    #[test]
    fn nondifferential_components_leave_the_estimate_as_the_bound() {
        let observed = ObservedAssociation::new(1.51, RatioScale::OddsRatio).unwrap();
        let m = ExposureMisclassification::new(0.7, 0.7, 0.2, 0.2).unwrap();
        let c = dme_components_or(&m);
        assert_eq!(
            bound_true_or(&observed, &c, EffectDirection::Causative).unwrap(),
            1.51
        );
    }

    #[test]
    fn estimate_explained_away_exactly_when_max_dme_matches_it() {
        // odds(s1)/odds(s0) = 1.51 with s0 = 0.5, f1 = f0; the other
        // components stay below it, so max_dme = 1.51.
        let s1 = 1.51 / 2.51;
        let m = ExposureMisclassification::new(s1, 0.5, 0.3, 0.3).unwrap();
        let c = dme_components_or(&m);
        assert_relative_eq!(c.max_dme(), 1.51, max_relative = 1e-12);

        let observed = ObservedAssociation::new(1.51, RatioScale::OddsRatio).unwrap();
        let bound = bound_true_or(&observed, &c, EffectDirection::Causative).unwrap();
        assert_relative_eq!(bound, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn bound_rejects_risk_ratio_input() {
        let observed = ObservedAssociation::new(2.0, RatioScale::RiskRatio).unwrap();
        let c = dme_components_or(&worked_misclassification());
        assert_eq!(
            bound_true_or(&observed, &c, EffectDirection::Causative),
            Err(Error::ScaleMismatch {
                expected: RatioScale::OddsRatio,
                found: RatioScale::RiskRatio
            })
        );
    }

    #[test]
    fn near_perfect_measurement_recovers_the_true_odds_ratio() {
        let eps = 1e-9;
        let m = ExposureMisclassification::new(1.0 - eps, 1.0 - eps, eps, eps).unwrap();
        let observed = forward_observed_or(&worked_population(), &m);
        assert_relative_eq!(observed.estimate(), 3.0, max_relative = 1e-6);
    }

    #[test]
    fn null_true_effect_stays_within_the_dme_components() {
        let p = PopulationModel::new(0.4, TrueBinaryModel::new(0.3, 0.3).unwrap()).unwrap();
        let m = ExposureMisclassification::new(0.9, 0.6, 0.1, 0.1).unwrap();
        let observed = forward_observed_or(&p, &m);
        let c = dme_components_or(&m);
        assert!(observed.estimate() > 1.0);
        assert!(observed.estimate() <= c.max_dme());
        assert!(observed.estimate() >= c.min_dme());
    }

    #[test]
    fn swapping_outcome_labels_inverts_the_observed_estimate() {
        let p = worked_population();
        let m = worked_misclassification();
        let observed = forward_observed_or(&p, &m);

        let swapped_outcome =
            TrueBinaryModel::new(1.0 - p.outcome().p1(), 1.0 - p.outcome().p0()).unwrap();
        let swapped_p = PopulationModel::new(p.prevalence(), swapped_outcome).unwrap();
        let swapped_m = ExposureMisclassification::new(m.s0(), m.s1(), m.f0(), m.f1()).unwrap();
        let swapped = forward_observed_or(&swapped_p, &swapped_m);
        assert_relative_eq!(
            swapped.estimate(),
            1.0 / observed.estimate(),
            max_relative = 1e-12
        );
    }
}
