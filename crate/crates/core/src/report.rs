//! Report documents: one structured shape (`mode`, `inputs`, `results`,
//! `warnings`) shared by every analysis mode and by verification runs.
//!
//! Results carry full precision; any display rounding is the renderer's
//! business. Inputs are echoed verbatim so a report is reproducible from
//! itself.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::continuous::{
    correct_beta_outcome, correct_coeff_exposure, ContinuousExposureSpec, ContinuousOutcomeSpec,
    OutcomeKind,
};
use crate::domain::{null_direction, AssociationDirection, ObservedAssociation, RatioScale};
use crate::error::{Error, Result};
use crate::exposure::{bound_true_or, dme_components_or, ExposureMisclassification};
use crate::outcome::{bound_true_rr, dme_components_rr, OutcomeMisclassification};
use crate::oracle::{Theorem4Exploration, VerificationReport};
use crate::thresholds::{ci_shift_threshold, explain_away_threshold, shift_threshold, Threshold};

/// Caveat attached whenever a risk ratio stands in for an odds ratio under
/// the rare-outcome assumption.
pub const RARE_OUTCOME_CAVEAT: &str = "rare-outcome assumption: the risk-ratio input is treated \
     as an approximate odds ratio; the differential-error parameters remain odds ratios";

/// A bound/threshold analysis document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmeBoundReport {
    pub mode: String,
    pub inputs: Value,
    pub results: BoundResults,
    pub warnings: Vec<String>,
}

/// Mode-specific results; absent sections are omitted from serialization.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundResults {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<ObservedAssociation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<AssociationDirection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome_dme: Option<crate::outcome::OutcomeDmeComponents>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exposure_dme: Option<crate::exposure::ExposureDmeComponents>,
    /// True when r_c or r_i exceeds both measurement odds ratios, so the
    /// thresholds speak to max_dme rather than the two odds ratios alone.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification_ratio_dominates: Option<bool>,
    /// Bound on the true ratio implied by the supplied error parameters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explain_away: Option<Threshold>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<CurvePoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected: Option<f64>,
    /// Set when the corrected value is approximate (logistic rare-outcome).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approximate: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftResult {
    pub target: f64,
    pub threshold: Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub assumed_max_dme: f64,
    pub implied_bound: f64,
}

/// A verification-run document with the same top-level shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub mode: String,
    pub inputs: Value,
    pub results: VerifyResults,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResults {
    pub reports: Vec<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem4_exploration: Option<Theorem4Exploration>,
}

/// Range for a bound-vs-assumed-DME curve: `steps` points from `min` to
/// `max` inclusive, with `min >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRangeRaw")]
pub struct CurveRange {
    min: f64,
    max: f64,
    steps: u32,
}

#[derive(Deserialize)]
struct CurveRangeRaw {
    min: f64,
    max: f64,
    steps: u32,
}

impl TryFrom<CurveRangeRaw> for CurveRange {
    type Error = Error;

    fn try_from(raw: CurveRangeRaw) -> Result<Self> {
        CurveRange::new(raw.min, raw.max, raw.steps)
    }
}

impl CurveRange {
    pub fn new(min: f64, max: f64, steps: u32) -> Result<Self> {
        let invalid = |requirement| Error::InvalidCurveRange {
            min,
            max,
            steps,
            requirement,
        };
        if !(min.is_finite() && max.is_finite()) {
            return Err(invalid("endpoints must be finite"));
        }
        if min < 1.0 {
            return Err(invalid("assumed DME starts at 1"));
        }
        if max < min {
            return Err(invalid("range is inverted"));
        }
        if steps == 0 {
            return Err(invalid("need at least one step"));
        }
        Ok(Self { min, max, steps })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }
}

/// Tabulate the implied bound, estimate / assumed_max_dme, over the range.
/// The second column is monotone non-increasing.
pub fn bound_curve(observed: &ObservedAssociation, range: &CurveRange) -> Vec<CurvePoint> {
    let estimate = observed.estimate();
    (0..range.steps)
        .map(|i| {
            let assumed = if range.steps == 1 {
                range.min
            } else if i == range.steps - 1 {
                range.max
            } else {
                range.min + (range.max - range.min) * i as f64 / (range.steps - 1) as f64
            };
            CurvePoint {
                assumed_max_dme: assumed,
                implied_bound: estimate / assumed,
            }
        })
        .collect()
}

fn base_ratio_results(
    observed: &ObservedAssociation,
    target: Option<f64>,
    curve: Option<&CurveRange>,
    warnings: &mut Vec<String>,
) -> Result<BoundResults> {
    let mut results = BoundResults {
        observed: Some(*observed),
        direction: Some(null_direction(observed)),
        ..BoundResults::default()
    };
    match explain_away_threshold(observed) {
        Ok(threshold) => results.explain_away = Some(threshold),
        Err(Error::AlreadyNull) => {
            warnings.push("observed association is exactly 1; nothing to explain away".to_owned());
        }
        Err(other) => return Err(other),
    }
    if let Some(target) = target {
        results.shift = Some(ShiftResult {
            target,
            threshold: shift_threshold(observed, target)?,
        });
    }
    if observed.ci().is_some() {
        results.ci_shift = Some(ci_shift_threshold(observed)?);
    }
    if let Some(range) = curve {
        results.curve = Some(bound_curve(observed, range));
    }
    Ok(results)
}

/// Analysis report for differential outcome misclassification on the
/// risk-ratio scale.
pub fn outcome_rr_report(
    observed: &ObservedAssociation,
    misclassification: Option<&OutcomeMisclassification>,
    target: Option<f64>,
    curve: Option<&CurveRange>,
    inputs: Value,
) -> Result<DmeBoundReport> {
    observed.require_scale(RatioScale::RiskRatio)?;
    let mut warnings = Vec::new();
    let mut results = base_ratio_results(observed, target, curve, &mut warnings)?;

    if let Some(m) = misclassification {
        let components = dme_components_rr(m);
        results.outcome_dme = Some(components);
        match null_direction(observed).effect() {
            Some(direction) => {
                results.bound = Some(bound_true_rr(observed, &components, direction)?);
            }
            None => warnings
                .push("observed association is exactly 1; no direction-specific bound".to_owned()),
        }
    }

    Ok(DmeBoundReport {
        mode: "outcome-rr".to_owned(),
        inputs,
        results,
        warnings,
    })
}

/// Analysis report for differential exposure misclassification on the
/// odds-ratio scale. A risk-ratio input is accepted only under
/// `assume_rare_outcome`, with a mandatory caveat.
pub fn exposure_or_report(
    observed: &ObservedAssociation,
    misclassification: Option<&ExposureMisclassification>,
    target: Option<f64>,
    curve: Option<&CurveRange>,
    assume_rare_outcome: bool,
    inputs: Value,
) -> Result<DmeBoundReport> {
    let mut warnings = Vec::new();
    let working = if observed.scale() == RatioScale::OddsRatio {
        *observed
    } else if assume_rare_outcome {
        warnings.push(RARE_OUTCOME_CAVEAT.to_owned());
        match observed.ci() {
            Some((lo, hi)) => {
                ObservedAssociation::with_ci(observed.estimate(), RatioScale::OddsRatio, lo, hi)?
            }
            None => ObservedAssociation::new(observed.estimate(), RatioScale::OddsRatio)?,
        }
    } else {
        return Err(Error::ScaleMismatch {
            expected: RatioScale::OddsRatio,
            found: observed.scale(),
        });
    };

    let mut results = base_ratio_results(observed, target, curve, &mut warnings)?;

    if let Some(m) = misclassification {
        let components = dme_components_or(m);
        results.exposure_dme = Some(components);
        results.classification_ratio_dominates = Some(components.classification_ratio_dominates());
        if components.classification_ratio_dominates() {
            warnings.push(
                "a classification ratio exceeds both measurement odds ratios; thresholds \
                 apply to the maximum DME component, not the two odds ratios alone"
                    .to_owned(),
            );
        }
        match null_direction(&working).effect() {
            Some(direction) => {
                results.bound = Some(bound_true_or(&working, &components, direction)?);
            }
            None => warnings
                .push("observed association is exactly 1; no direction-specific bound".to_owned()),
        }
    }

    Ok(DmeBoundReport {
        mode: "exposure-or".to_owned(),
        inputs,
        results,
        warnings,
    })
}

/// Corrected-slope report for a mismeasured continuous outcome.
pub fn continuous_outcome_report(spec: &ContinuousOutcomeSpec, inputs: Value) -> DmeBoundReport {
    let results = BoundResults {
        corrected: Some(correct_beta_outcome(spec)),
        ..BoundResults::default()
    };
    DmeBoundReport {
        mode: "continuous-outcome".to_owned(),
        inputs,
        results,
        warnings: Vec::new(),
    }
}

/// Corrected-slope report for a mismeasured continuous exposure.
pub fn continuous_exposure_report(spec: &ContinuousExposureSpec, inputs: Value) -> DmeBoundReport {
    let mut warnings = Vec::new();
    let approximate = spec.outcome_kind() == OutcomeKind::RareBinaryLogistic;
    if approximate {
        warnings.push("logistic-scale correction is approximate (rare outcome)".to_owned());
    }
    if spec.gamma1() != 0.0 {
        warnings.push(
            "the certified round trip covers gamma1 = 0; with gamma1 != 0 the correction is \
             a formula transform whose exactness depends on the measurement model"
                .to_owned(),
        );
    }
    let results = BoundResults {
        corrected: Some(correct_coeff_exposure(spec)),
        approximate: approximate.then_some(true),
        ..BoundResults::default()
    };
    DmeBoundReport {
        mode: "continuous-exposure".to_owned(),
        inputs,
        results,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use serde_json::json;

    fn worked_observed() -> ObservedAssociation {
        ObservedAssociation::with_ci(1.51, RatioScale::OddsRatio, 1.03, 2.22).unwrap()
    }

    #[test]
    fn worked_example_thresholds() {
        let report =
            exposure_or_report(&worked_observed(), None, Some(1.1), None, false, json!({}))
                .unwrap();
        let results = report.results;
        assert_eq!(results.explain_away.unwrap().factor(), 1.51);
        assert_relative_eq!(
            results.shift.unwrap().threshold.factor(),
            1.51 / 1.1,
            max_relative = 1e-12
        );
        assert_eq!(results.ci_shift.unwrap(), 1.03);
        assert_eq!(results.direction.unwrap(), AssociationDirection::Causative);
        assert!(results.bound.is_none());
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn exposure_report_includes_components_bound_and_advisory() {
        let m = ExposureMisclassification::new(0.9, 0.8, 0.2, 0.1).unwrap();
        let observed = ObservedAssociation::new(3.263157894736842, RatioScale::OddsRatio).unwrap();
        let report =
            exposure_or_report(&observed, Some(&m), None, None, false, json!({})).unwrap();
        let results = report.results;
        assert_relative_eq!(
            results.bound.unwrap(),
            0.8157894736842105,
            max_relative = 1e-12
        );
        assert_eq!(results.classification_ratio_dominates, Some(true));
        assert!(report.warnings.iter().any(|w| w.contains("classification ratio")));
        assert_eq!(results.exposure_dme.unwrap().r_incorrect(), 4.0);
    }

    #[test]
    fn exposure_report_rejects_risk_ratio_without_rare_flag() {
        let rr = ObservedAssociation::new(1.4, RatioScale::RiskRatio).unwrap();
        assert!(matches!(
            exposure_or_report(&rr, None, None, None, false, json!({})),
            Err(Error::ScaleMismatch { .. })
        ));
        let report = exposure_or_report(&rr, None, None, None, true, json!({})).unwrap();
        assert_eq!(report.warnings, vec![RARE_OUTCOME_CAVEAT.to_owned()]);
        // the observed association is echoed on its declared scale
        assert_eq!(report.results.observed.unwrap().scale(), RatioScale::RiskRatio);
    }

    #[test]
    fn outcome_report_with_parameters_takes_the_causative_branch() {
        let m = OutcomeMisclassification::new(0.9, 0.8, 0.1, 0.05).unwrap();
        let observed = ObservedAssociation::new(2.1, RatioScale::RiskRatio).unwrap();
        let report = outcome_rr_report(&observed, Some(&m), None, None, json!({})).unwrap();
        assert_relative_eq!(report.results.bound.unwrap(), 1.05, max_relative = 1e-12);
        assert_eq!(report.results.outcome_dme.unwrap().max_dme(), 2.0);
        assert!(report.results.ci_shift.is_none());
    }

    #[test]
    fn null_estimate_reports_warnings_not_errors() {
        let m = OutcomeMisclassification::new(0.9, 0.8, 0.1, 0.05).unwrap();
        let observed = ObservedAssociation::new(1.0, RatioScale::RiskRatio).unwrap();
        let report = outcome_rr_report(&observed, Some(&m), None, None, json!({})).unwrap();
        assert!(report.results.explain_away.is_none());
        assert!(report.results.bound.is_none());
        assert_eq!(report.warnings.len(), 2);
    }

    #[test]
    fn curve_rows_divide_the_estimate() {
        let observed = ObservedAssociation::new(1.51, RatioScale::OddsRatio).unwrap();
        let range = CurveRange::new(1.0, 2.0, 3).unwrap();
        let rows = bound_curve(&observed, &range);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].assumed_max_dme, 1.0);
        assert_eq!(rows[0].implied_bound, 1.51);
        assert_eq!(rows[1].assumed_max_dme, 1.5);
        assert_relative_eq!(rows[1].implied_bound, 1.51 / 1.5, max_relative = 1e-12);
        assert_eq!(rows[2].assumed_max_dme, 2.0);
        assert_relative_eq!(rows[2].implied_bound, 0.755, max_relative = 1e-12);
        assert!(rows.windows(2).all(|w| w[1].implied_bound <= w[0].implied_bound));
    }

    #[test]
    fn single_point_curve_and_bad_ranges() {
        let observed = ObservedAssociation::new(1.51, RatioScale::OddsRatio).unwrap();
        let range = CurveRange::new(1.0, 1.0, 1).unwrap();
        let rows = bound_curve(&observed, &range);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].implied_bound, 1.51);

        assert!(CurveRange::new(0.9, 2.0, 3).is_err());
        assert!(CurveRange::new(2.0, 1.0, 3).is_err());
        assert!(CurveRange::new(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn continuous_reports_carry_corrections_and_caveats() {
        let outcome_spec = ContinuousOutcomeSpec::new(0.7, 0.2, 1.0).unwrap();
        let report = continuous_outcome_report(&outcome_spec, json!({}));
        assert_relative_eq!(report.results.corrected.unwrap(), 0.5, max_relative = 1e-12);
        assert!(report.warnings.is_empty());

        let exposure_spec =
            ContinuousExposureSpec::new(0.6, 0.3, 2.0, 2.0, OutcomeKind::RareBinaryLogistic)
                .unwrap();
        let report = continuous_exposure_report(&exposure_spec, json!({}));
        assert_relative_eq!(report.results.corrected.unwrap(), 1.05, max_relative = 1e-12);
        assert_eq!(report.results.approximate, Some(true));
        assert_eq!(report.warnings.len(), 2);
    }

    #[test]
    fn structured_report_round_trips_identically() {
        let m = ExposureMisclassification::new(0.9, 0.8, 0.2, 0.1).unwrap();
        let observed = worked_observed();
        let range = CurveRange::new(1.0, 2.0, 5).unwrap();
        let report = exposure_or_report(
            &observed,
            Some(&m),
            Some(1.1),
            Some(&range),
            false,
            json!({"estimate": 1.51, "ci": [1.03, 2.22], "target": 1.1}),
        )
        .unwrap();
        let rendered = serde_json::to_string_pretty(&report).unwrap();
        let parsed: DmeBoundReport = serde_json::from_str(&rendered).unwrap();
        let rerendered = serde_json::to_string_pretty(&parsed).unwrap();
        assert_eq!(rendered, rerendered);
        assert_eq!(parsed, report);
    }
}
