//! Property tests for the stated invariants: estimator symmetries, threshold
//! normalization, the misclassification bounds themselves on random draws,
//! and the continuous-correction round trips.

use dme_core::continuous::{
    correct_beta_outcome, correct_coeff_exposure, forward_beta_star_outcome,
    ContinuousExposureSpec, ContinuousOutcomeSpec, OutcomeKind,
};
use dme_core::domain::{
    estimate_odds_ratio, estimate_risk_ratio, ContingencyTable, ObservedAssociation, RatioScale,
    TrueBinaryModel,
};
use dme_core::exposure::{
    dme_components_or, forward_observed_or, ExposureMisclassification, PopulationModel,
};
use dme_core::outcome::{dme_components_rr, forward_observed_rr, OutcomeMisclassification};
use dme_core::report::{bound_curve, CurveRange};
use dme_core::thresholds::explain_away_threshold;
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn prob() -> impl Strategy<Value = f64> {
    0.001..0.999f64
}

fn count() -> impl Strategy<Value = u64> {
    1..5000u64
}

/// Normalized slack of lhs >= rhs for positive quantities.
fn slack(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / lhs.max(rhs)
}

proptest! {
    #[test]
    fn estimates_are_invariant_under_cell_scaling(
        a in count(), b in count(), c in count(), d in count(), k in 2u64..50
    ) {
        let base = ContingencyTable::new(a, b, c, d).unwrap();
        let scaled = ContingencyTable::new(a * k, b * k, c * k, d * k).unwrap();
        prop_assert_eq!(
            estimate_risk_ratio(&base, false).unwrap().estimate(),
            estimate_risk_ratio(&scaled, false).unwrap().estimate()
        );
        prop_assert_eq!(
            estimate_odds_ratio(&base, false).unwrap().estimate(),
            estimate_odds_ratio(&scaled, false).unwrap().estimate()
        );
    }

    #[test]
    fn odds_ratio_is_the_more_extreme_estimate(
        a in count(), b in count(), c in count(), d in count()
    ) {
        let table = ContingencyTable::new(a, b, c, d).unwrap();
        let rr = estimate_risk_ratio(&table, false).unwrap().estimate();
        let or = estimate_odds_ratio(&table, false).unwrap().estimate();
        if rr >= 1.0 {
            prop_assert!(slack(or, rr) >= -TOL, "or={or} rr={rr}");
        } else {
            prop_assert!(slack(rr, or) >= -TOL, "or={or} rr={rr}");
        }
    }

    #[test]
    fn wald_limits_bracket_the_estimate(
        a in count(), b in count(), c in count(), d in count()
    ) {
        let table = ContingencyTable::new(a, b, c, d).unwrap();
        for assoc in [
            estimate_risk_ratio(&table, false).unwrap(),
            estimate_odds_ratio(&table, false).unwrap(),
        ] {
            let (lo, hi) = assoc.ci().unwrap();
            prop_assert!(lo <= assoc.estimate() && assoc.estimate() <= hi);
        }
    }

    #[test]
    fn explain_away_threshold_is_reciprocal_symmetric(estimate in 0.01..100.0f64) {
        prop_assume!(estimate != 1.0);
        let forward = ObservedAssociation::new(estimate, RatioScale::RiskRatio).unwrap();
        let reciprocal = ObservedAssociation::new(1.0 / estimate, RatioScale::RiskRatio).unwrap();
        let t1 = explain_away_threshold(&forward).unwrap();
        let t2 = explain_away_threshold(&reciprocal).unwrap();
        prop_assert!((t1.factor() - t2.factor()).abs() <= TOL * t1.factor().max(t2.factor()));
        prop_assert_ne!(t1.direction(), t2.direction());
        prop_assert!(t1.factor() >= 1.0 && t2.factor() >= 1.0);
    }

    #[test]
    fn outcome_bound_holds_on_random_draws(
        p1 in prob(), p0 in prob(),
        s1 in prob(), s0 in prob(), f1 in prob(), f0 in prob()
    ) {
        let t = TrueBinaryModel::new(p1, p0).unwrap();
        let m = OutcomeMisclassification::new(s1, s0, f1, f0).unwrap();
        let c = dme_components_rr(&m);
        let observed = forward_observed_rr(&t, &m).estimate();
        if p1 >= p0 {
            prop_assert!(slack(t.risk_ratio(), observed / c.max_dme()) >= -TOL);
        }
        if p1 <= p0 {
            prop_assert!(slack(observed / c.min_dme(), t.risk_ratio()) >= -TOL);
        }
    }

    #[test]
    fn outcome_null_effect_stays_within_components(
        p in prob(), s1 in prob(), s0 in prob(), f1 in prob(), f0 in prob()
    ) {
        let t = TrueBinaryModel::new(p, p).unwrap();
        let m = OutcomeMisclassification::new(s1, s0, f1, f0).unwrap();
        let c = dme_components_rr(&m);
        let observed = forward_observed_rr(&t, &m).estimate();
        prop_assert!(slack(c.max_dme(), observed) >= -TOL);
        prop_assert!(slack(observed, c.min_dme()) >= -TOL);
    }

    #[test]
    fn nondifferential_error_biases_toward_the_null(
        p1 in prob(), p0 in prob(), s in prob(), f in prob()
    ) {
        let t = TrueBinaryModel::new(p1, p0).unwrap();
        let m = OutcomeMisclassification::new(s, s, f, f).unwrap();
        let observed = forward_observed_rr(&t, &m).estimate();
        if p1 >= p0 {
            prop_assert!(slack(t.risk_ratio(), observed) >= -TOL);
        } else {
            prop_assert!(slack(observed, t.risk_ratio()) >= -TOL);
        }
    }

    #[test]
    fn exposure_bound_holds_on_random_draws(
        pi in prob(), p1 in prob(), p0 in prob(),
        s1 in prob(), s0 in prob(), f1 in prob(), f0 in prob()
    ) {
        let t = TrueBinaryModel::new(p1, p0).unwrap();
        let p = PopulationModel::new(pi, t).unwrap();
        let m = ExposureMisclassification::new(s1, s0, f1, f0).unwrap();
        let c = dme_components_or(&m);
        let observed = forward_observed_or(&p, &m).estimate();
        if p1 >= p0 {
            prop_assert!(slack(t.odds_ratio(), observed / c.max_dme()) >= -TOL);
        }
        if p1 <= p0 {
            prop_assert!(slack(observed / c.min_dme(), t.odds_ratio()) >= -TOL);
        }
    }

    #[test]
    fn exposure_label_swap_inverts_components_and_estimate(
        pi in prob(), p1 in prob(), p0 in prob(),
        s1 in prob(), s0 in prob(), f1 in prob(), f0 in prob()
    ) {
        let m = ExposureMisclassification::new(s1, s0, f1, f0).unwrap();
        let swapped = ExposureMisclassification::new(s0, s1, f0, f1).unwrap();
        let c = dme_components_or(&m);
        let cs = dme_components_or(&swapped);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
        prop_assert!(close(cs.or_sensitivity(), 1.0 / c.or_sensitivity()));
        prop_assert!(close(cs.or_false_positive(), 1.0 / c.or_false_positive()));
        prop_assert!(close(cs.r_correct(), 1.0 / c.r_correct()));
        prop_assert!(close(cs.r_incorrect(), 1.0 / c.r_incorrect()));
        prop_assert!(close(cs.max_dme(), 1.0 / c.min_dme()));

        let pop = PopulationModel::new(pi, TrueBinaryModel::new(p1, p0).unwrap()).unwrap();
        let swapped_pop =
            PopulationModel::new(pi, TrueBinaryModel::new(1.0 - p1, 1.0 - p0).unwrap()).unwrap();
        let observed = forward_observed_or(&pop, &m).estimate();
        let observed_swapped = forward_observed_or(&swapped_pop, &swapped).estimate();
        prop_assert!(close(observed_swapped, 1.0 / observed));
    }

    #[test]
    fn outcome_correction_round_trips(
        beta1 in -2.0..2.0f64,
        gamma1 in -2.0..2.0f64,
        magnitude in 1e-3f64..4.0,
        negative in any::<bool>(),
    ) {
        let gamma2 = if negative { -magnitude } else { magnitude };
        let observed = forward_beta_star_outcome(beta1, gamma1, gamma2);
        let spec = ContinuousOutcomeSpec::new(observed, gamma1, gamma2).unwrap();
        let recovered = correct_beta_outcome(&spec);
        prop_assert!(
            (recovered - beta1).abs() <= TOL * beta1.abs().max(1.0),
            "beta1={beta1} gamma1={gamma1} gamma2={gamma2} recovered={recovered}"
        );
    }

    #[test]
    fn exposure_correction_round_trips_nondifferentially(
        beta1 in -2.0..2.0f64,
        sigma_a2 in 0.01..100.0f64,
        sigma_u2 in 0.0..100.0f64,
    ) {
        let lambda = sigma_a2 / (sigma_a2 + sigma_u2);
        let spec = ContinuousExposureSpec::new(
            beta1 * lambda, 0.0, sigma_a2, sigma_u2, OutcomeKind::Linear,
        ).unwrap();
        let recovered = correct_coeff_exposure(&spec);
        prop_assert!((recovered - beta1).abs() <= TOL * beta1.abs().max(1.0));
    }

    #[test]
    fn exposure_correction_is_strictly_decreasing_in_gamma1(
        coeff in -2.0..2.0f64,
        gamma1 in -2.0..2.0f64,
        delta in 1e-6..1.0f64,
        sigma_a2 in 0.1..10.0f64,
        sigma_u2 in 0.0..10.0f64,
    ) {
        let lo = ContinuousExposureSpec::new(coeff, gamma1, sigma_a2, sigma_u2, OutcomeKind::Linear)
            .unwrap();
        let hi = ContinuousExposureSpec::new(
            coeff, gamma1 + delta, sigma_a2, sigma_u2, OutcomeKind::Linear,
        ).unwrap();
        prop_assert!(correct_coeff_exposure(&lo) > correct_coeff_exposure(&hi));
    }

    #[test]
    fn exposure_correction_is_strictly_decreasing_in_lambda(
        gamma1 in -2.0..2.0f64,
        excess in 0.01..2.0f64,
        total_var in 0.5..20.0f64,
        frac_lo in 0.01..0.98f64,
        frac_gap in 0.01..0.5f64,
    ) {
        // hold coeff - gamma1/total positive so the monotonicity direction is fixed
        let coeff = gamma1 / total_var + excess;
        let frac_hi = (frac_lo + frac_gap).min(0.99);
        let spec_at = |frac: f64| {
            ContinuousExposureSpec::new(
                coeff, gamma1, frac * total_var, total_var - frac * total_var,
                OutcomeKind::Linear,
            ).unwrap()
        };
        let lo_lambda = spec_at(frac_lo);
        let hi_lambda = spec_at(frac_hi);
        prop_assert!(lo_lambda.lambda() < hi_lambda.lambda());
        prop_assert!(correct_coeff_exposure(&lo_lambda) > correct_coeff_exposure(&hi_lambda));
    }

    #[test]
    fn exposure_correction_rescales_with_measurement_units(
        coeff in -2.0..2.0f64,
        gamma1 in -2.0..2.0f64,
        sigma_a2 in 0.1..10.0f64,
        sigma_u2 in 0.0..10.0f64,
        k in 0.25..8.0f64,
    ) {
        let base =
            ContinuousExposureSpec::new(coeff, gamma1, sigma_a2, sigma_u2, OutcomeKind::Linear)
                .unwrap();
        let scaled = ContinuousExposureSpec::new(
            coeff / k, gamma1 * k, sigma_a2 * k * k, sigma_u2 * k * k, OutcomeKind::Linear,
        ).unwrap();
        let expected = correct_coeff_exposure(&base) / k;
        let actual = correct_coeff_exposure(&scaled);
        prop_assert!((actual - expected).abs() <= 1e-11 * expected.abs().max(1.0));
    }

    #[test]
    fn bound_curve_is_monotone_non_increasing(
        estimate in 0.05..50.0f64,
        min in 1.0..4.0f64,
        span in 0.0..6.0f64,
        steps in 1u32..40,
    ) {
        let observed = ObservedAssociation::new(estimate, RatioScale::RiskRatio).unwrap();
        let range = CurveRange::new(min, min + span, steps).unwrap();
        let rows = bound_curve(&observed, &range);
        prop_assert_eq!(rows.len(), steps as usize);
        prop_assert!(rows.windows(2).all(|w| w[1].implied_bound <= w[0].implied_bound));
        prop_assert_eq!(rows[0].implied_bound, estimate / rows[0].assumed_max_dme);
    }
}
