//! Plain-text rendering. Computed numbers are rounded to 2 decimals for
//! display; the JSON output carries full precision.

use std::fmt::Write;

use dme_core::report::{DmeBoundReport, VerifyReport};
use dme_core::thresholds::Threshold;
use serde_json::Value;

fn r2(x: f64) -> String {
    format!("{x:.2}")
}

fn threshold_text(t: &Threshold) -> String {
    format!("{} ({})", r2(t.factor()), t.direction())
}

fn push_inputs(out: &mut String, inputs: &Value) {
    if let Value::Object(map) = inputs {
        if map.is_empty() {
            return;
        }
        out.push_str("inputs:\n");
        for (key, value) in map {
            let _ = writeln!(out, "  {key}: {value}");
        }
    }
}

pub fn bound_report_text(report: &DmeBoundReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode: {}", report.mode);
    push_inputs(&mut out, &report.inputs);
    out.push_str("results:\n");

    let results = &report.results;
    if let Some(observed) = &results.observed {
        let mut line = format!("  observed {}: {}", observed.scale(), r2(observed.estimate()));
        if let Some((lo, hi)) = observed.ci() {
            let _ = write!(line, " (95% CI {}, {})", r2(lo), r2(hi));
        }
        out.push_str(&line);
        out.push('\n');
    }
    if let Some(direction) = results.direction {
        let _ = writeln!(out, "  direction: {direction}");
    }
    if let Some(c) = &results.outcome_dme {
        let _ = writeln!(
            out,
            "  dme components: sensitivity ratio {}, false-positive ratio {}",
            r2(c.sensitivity_ratio()),
            r2(c.false_positive_ratio())
        );
        let _ = writeln!(out, "  max dme: {}, min dme: {}", r2(c.max_dme()), r2(c.min_dme()));
    }
    if let Some(c) = &results.exposure_dme {
        let _ = writeln!(
            out,
            "  dme components: sensitivity OR {}, false-positive OR {}, r_correct {}, r_incorrect {}",
            r2(c.or_sensitivity()),
            r2(c.or_false_positive()),
            r2(c.r_correct()),
            r2(c.r_incorrect())
        );
        let _ = writeln!(out, "  max dme: {}, min dme: {}", r2(c.max_dme()), r2(c.min_dme()));
    }
    if let Some(dominates) = results.classification_ratio_dominates {
        let _ = writeln!(out, "  classification ratio dominates: {dominates}");
    }
    if let Some(bound) = results.bound {
        let scale = results
            .observed
            .map(|o| o.scale().to_string())
            .unwrap_or_else(|| "ratio".to_owned());
        let _ = writeln!(out, "  bound on true {scale}: {}", r2(bound));
    }
    if let Some(t) = &results.explain_away {
        let _ = writeln!(out, "  explain-away threshold: {}", threshold_text(t));
    }
    if let Some(shift) = &results.shift {
        let _ = writeln!(
            out,
            "  shift threshold to {}: {}",
            r2(shift.target),
            threshold_text(&shift.threshold)
        );
    }
    if let Some(ci_shift) = results.ci_shift {
        let _ = writeln!(out, "  ci-shift threshold: {}", r2(ci_shift));
    }
    if let Some(corrected) = results.corrected {
        let suffix = if results.approximate == Some(true) {
            " (approximate)"
        } else {
            ""
        };
        let _ = writeln!(out, "  corrected coefficient: {}{suffix}", r2(corrected));
    }
    if let Some(curve) = &results.curve {
        out.push_str("curve:\nassumed_max_dme,implied_bound\n");
        for point in curve {
            let _ = writeln!(out, "{},{}", point.assumed_max_dme, point.implied_bound);
        }
    }
    if report.warnings.is_empty() {
        out.push_str("warnings: none\n");
    } else {
        out.push_str("warnings:\n");
        for warning in &report.warnings {
            let _ = writeln!(out, "  - {warning}");
        }
    }
    out
}

pub fn verify_text(doc: &VerifyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode: {}", doc.mode);
    push_inputs(&mut out, &doc.inputs);
    out.push_str("results:\n");
    for report in &doc.results.reports {
        let _ = writeln!(
            out,
            "  {}: PASS ({} cases, {} violations, worst slack {:.3e}, max residual {:.3e}, \
             tolerance {:.0e}, rng {})",
            report.theorem_id(),
            report.cases_checked(),
            report.violations(),
            report.worst_slack(),
            report.max_abs_residual(),
            report.tolerance(),
            report.rng(),
        );
    }
    if let Some(table) = &doc.results.theorem4_exploration {
        let _ = writeln!(
            out,
            "  theorem4 exploratory Monte Carlo ({} samples/row, rng {}, seed {}; not a certificate):",
            table.samples_per_row, table.rng, table.seed
        );
        let _ = writeln!(
            out,
            "  beta1  gamma1  sigma_a2  sigma_u2  naive_slope  corrected  relative_gap"
        );
        for row in &table.rows {
            let _ = writeln!(
                out,
                "  {:<5} {:>7} {:>9} {:>9} {:>12.4} {:>10.4} {:>13.4}",
                row.beta1, row.gamma1, row.sigma_a2, row.sigma_u2,
                row.naive_slope, row.corrected, row.relative_gap
            );
        }
    }
    if doc.warnings.is_empty() {
        out.push_str("warnings: none\n");
    } else {
        out.push_str("warnings:\n");
        for warning in &doc.warnings {
            let _ = writeln!(out, "  - {warning}");
        }
    }
    out
}
