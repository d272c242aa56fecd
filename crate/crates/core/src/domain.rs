//! Shared domain types: ratio-scale associations, true binary outcome models,
//! and contingency-table estimators.
//!
//! Everything here is per covariate stratum. Ingesting a stratified CSV yields
//! one table per stratum; nothing in this crate pools across strata.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// z quantile pinned for the 95% Wald intervals.
const Z_95: f64 = 1.959964;

/// The scale an association is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioScale {
    RiskRatio,
    OddsRatio,
}

impl fmt::Display for RatioScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioScale::RiskRatio => write!(f, "risk-ratio"),
            RatioScale::OddsRatio => write!(f, "odds-ratio"),
        }
    }
}

/// Sign of an observed association relative to the null.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssociationDirection {
    Causative,
    Preventive,
    Null,
}

impl AssociationDirection {
    /// The assumed direction of the true effect, if the association is not null.
    pub fn effect(self) -> Option<EffectDirection> {
        match self {
            AssociationDirection::Causative => Some(EffectDirection::Causative),
            AssociationDirection::Preventive => Some(EffectDirection::Preventive),
            AssociationDirection::Null => None,
        }
    }
}

impl fmt::Display for AssociationDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssociationDirection::Causative => write!(f, "causative"),
            AssociationDirection::Preventive => write!(f, "preventive"),
            AssociationDirection::Null => write!(f, "null"),
        }
    }
}

/// Assumed direction of the true effect when applying a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectDirection {
    /// True ratio at or above 1; the bound is a lower bound.
    Causative,
    /// True ratio at or below 1; the bound is an upper bound.
    Preventive,
}

pub(crate) fn odds(p: f64) -> f64 {
    p / (1.0 - p)
}

fn require_probability(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            requirement: "must be a finite positive number",
        })
    }
}

/// A point estimate on a declared ratio scale, with optional 95% limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservedAssociationRaw")]
pub struct ObservedAssociation {
    estimate: f64,
    scale: RatioScale,
    #[serde(skip_serializing_if = "Option::is_none")]
    ci_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ci_upper: Option<f64>,
}

#[derive(Deserialize)]
struct ObservedAssociationRaw {
    estimate: f64,
    scale: RatioScale,
    #[serde(default)]
    ci_lower: Option<f64>,
    #[serde(default)]
    ci_upper: Option<f64>,
}

impl TryFrom<ObservedAssociationRaw> for ObservedAssociation {
    type Error = Error;

    fn try_from(raw: ObservedAssociationRaw) -> Result<Self> {
        match (raw.ci_lower, raw.ci_upper) {
            (Some(lo), Some(hi)) => ObservedAssociation::with_ci(raw.estimate, raw.scale, lo, hi),
            (None, None) => ObservedAssociation::new(raw.estimate, raw.scale),
            _ => Err(Error::MissingInterval),
        }
    }
}

impl ObservedAssociation {
    pub fn new(estimate: f64, scale: RatioScale) -> Result<Self> {
        require_positive("estimate", estimate)?;
        Ok(Self {
            estimate,
            scale,
            ci_lower: None,
            ci_upper: None,
        })
    }

    /// An association with 95% limits; requires 0 < lower <= estimate <= upper.
    pub fn with_ci(estimate: f64, scale: RatioScale, lower: f64, upper: f64) -> Result<Self> {
        require_positive("estimate", estimate)?;
        require_positive("ci_lower", lower)?;
        require_positive("ci_upper", upper)?;
        if !(lower <= estimate && estimate <= upper) {
            return Err(Error::InvalidParameter {
                name: "ci",
                value: lower,
                requirement: "confidence limits must bracket the estimate",
            });
        }
        Ok(Self {
            estimate,
            scale,
            ci_lower: Some(lower),
            ci_upper: Some(upper),
        })
    }

    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    pub fn scale(&self) -> RatioScale {
        self.scale
    }

    pub fn ci(&self) -> Option<(f64, f64)> {
        self.ci_lower.zip(self.ci_upper)
    }

    pub(crate) fn require_scale(&self, expected: RatioScale) -> Result<()> {
        if self.scale == expected {
            Ok(())
        } else {
            Err(Error::ScaleMismatch {
                expected,
                found: self.scale,
            })
        }
    }
}

/// True stratum-level outcome probabilities by exposure arm.
///
/// Both probabilities are strictly interior to (0, 1) so every ratio and
/// odds downstream is finite and positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrueBinaryModelRaw")]
pub struct TrueBinaryModel {
    p1: f64,
    p0: f64,
}

#[derive(Deserialize)]
struct TrueBinaryModelRaw {
    p1: f64,
    p0: f64,
}

impl TryFrom<TrueBinaryModelRaw> for TrueBinaryModel {
    type Error = Error;

    fn try_from(raw: TrueBinaryModelRaw) -> Result<Self> {
        TrueBinaryModel::new(raw.p1, raw.p0)
    }
}

impl TrueBinaryModel {
    pub fn new(p1: f64, p0: f64) -> Result<Self> {
        Ok(Self {
            p1: require_probability("p1", p1)?,
            p0: require_probability("p0", p0)?,
        })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn risk_ratio(&self) -> f64 {
        self.p1 / self.p0
    }

    pub fn odds_ratio(&self) -> f64 {
        odds(self.p1) / odds(self.p0)
    }
}

/// A 2x2 table of counts for one covariate stratum, indexed
/// (exposure level, outcome level).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ContingencyTableRaw")]
pub struct ContingencyTable {
    n11: u64,
    n10: u64,
    n01: u64,
    n00: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stratum: Option<String>,
}

#[derive(Deserialize)]
struct ContingencyTableRaw {
    n11: u64,
    n10: u64,
    n01: u64,
    n00: u64,
    #[serde(default)]
    stratum: Option<String>,
}

impl TryFrom<ContingencyTableRaw> for ContingencyTable {
    type Error = Error;

    fn try_from(raw: ContingencyTableRaw) -> Result<Self> {
        let table = ContingencyTable::new(raw.n11, raw.n10, raw.n01, raw.n00)?;
        Ok(match raw.stratum {
            Some(label) => table.with_stratum(label),
            None => table,
        })
    }
}

impl ContingencyTable {
    pub fn new(n11: u64, n10: u64, n01: u64, n00: u64) -> Result<Self> {
        let total = n11 as u128 + n10 as u128 + n01 as u128 + n00 as u128;
        if total == 0 {
            return Err(Error::InvalidParameter {
                name: "table total",
                value: 0.0,
                requirement: "at least one cell must be positive",
            });
        }
        Ok(Self {
            n11,
            n10,
            n01,
            n00,
            stratum: None,
        })
    }

    pub fn with_stratum(mut self, label: impl Into<String>) -> Self {
        self.stratum = Some(label.into());
        self
    }

    pub fn counts(&self) -> (u64, u64, u64, u64) {
        (self.n11, self.n10, self.n01, self.n00)
    }

    pub fn stratum(&self) -> Option<&str> {
        self.stratum.as_deref()
    }

    /// Cells as floats, applying the Haldane-Anscombe 0.5 correction when
    /// requested and some cell is zero. Margins are checked afterwards.
    fn cells(&self, haldane: bool) -> Result<[f64; 4]> {
        let raw = [self.n11, self.n10, self.n01, self.n00];
        let any_zero = raw.contains(&0);
        if any_zero && haldane {
            return Ok([
                self.n11 as f64 + 0.5,
                self.n10 as f64 + 0.5,
                self.n01 as f64 + 0.5,
                self.n00 as f64 + 0.5,
            ]);
        }
        if self.n11 + self.n10 == 0 {
            return Err(Error::EmptyMargin { arm: "exposed" });
        }
        if self.n01 + self.n00 == 0 {
            return Err(Error::EmptyMargin { arm: "unexposed" });
        }
        if any_zero {
            let cell = if self.n11 == 0 {
                "n11"
            } else if self.n10 == 0 {
                "n10"
            } else if self.n01 == 0 {
                "n01"
            } else {
                "n00"
            };
            return Err(Error::ZeroCell { cell });
        }
        Ok([
            self.n11 as f64,
            self.n10 as f64,
            self.n01 as f64,
            self.n00 as f64,
        ])
    }
}

fn wald_interval(estimate: f64, se_log: f64) -> (f64, f64) {
    let log = estimate.ln();
    (
        (log - Z_95 * se_log).exp(),
        (log + Z_95 * se_log).exp(),
    )
}

/// Risk ratio of a 2x2 table with log-scale Wald 95% limits.
pub fn estimate_risk_ratio(table: &ContingencyTable, haldane: bool) -> Result<ObservedAssociation> {
    let [a, b, c, d] = table.cells(haldane)?;
    let p1 = a / (a + b);
    let p0 = c / (c + d);
    let estimate = p1 / p0;
    let se = (1.0 / a - 1.0 / (a + b) + 1.0 / c - 1.0 / (c + d)).sqrt();
    let (lower, upper) = wald_interval(estimate, se);
    ObservedAssociation::with_ci(estimate, RatioScale::RiskRatio, lower, upper)
}

/// Odds ratio of a 2x2 table with log-scale Wald 95% limits.
pub fn estimate_odds_ratio(table: &ContingencyTable, haldane: bool) -> Result<ObservedAssociation> {
    let [a, b, c, d] = table.cells(haldane)?;
    let estimate = (a * d) / (b * c);
    let se = (1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d).sqrt();
    let (lower, upper) = wald_interval(estimate, se);
    ObservedAssociation::with_ci(estimate, RatioScale::OddsRatio, lower, upper)
}

/// Side of the null the observed estimate falls on (exact comparison).
pub fn null_direction(assoc: &ObservedAssociation) -> AssociationDirection {
    if assoc.estimate() > 1.0 {
        AssociationDirection::Causative
    } else if assoc.estimate() < 1.0 {
        AssociationDirection::Preventive
    } else {
        AssociationDirection::Null
    }
}

/// Reads long-format CSV (`exposure,outcome,count[,stratum]`) into one table
/// per distinct stratum, sorted by stratum label. Without a stratum column
/// every record lands in a single stratum named "all".
pub fn tables_from_csv<R: Read>(reader: R) -> Result<Vec<ContingencyTable>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let exposure_col = col("exposure").ok_or_else(|| missing_column("exposure"))?;
    let outcome_col = col("outcome").ok_or_else(|| missing_column("outcome"))?;
    let count_col = col("count").ok_or_else(|| missing_column("count"))?;
    let stratum_col = col("stratum");

    let mut strata: BTreeMap<String, [u64; 4]> = BTreeMap::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = Some(idx as u64 + 1);
        let exposure = parse_binary(record.get(exposure_col), "exposure", line)?;
        let outcome = parse_binary(record.get(outcome_col), "outcome", line)?;
        let count = parse_count(record.get(count_col), line)?;
        let stratum = match stratum_col {
            Some(col) => record
                .get(col)
                .map(str::to_owned)
                .unwrap_or_else(|| "all".to_owned()),
            None => "all".to_owned(),
        };
        let cells = strata.entry(stratum).or_insert([0; 4]);
        let cell = match (exposure, outcome) {
            (1, 1) => 0,
            (1, 0) => 1,
            (0, 1) => 2,
            _ => 3,
        };
        cells[cell] = cells[cell].checked_add(count).ok_or(Error::InvalidCsv {
            line,
            message: "count overflow".to_owned(),
        })?;
    }

    strata
        .into_iter()
        .map(|(label, [n11, n10, n01, n00])| {
            ContingencyTable::new(n11, n10, n01, n00)
                .map(|t| t.with_stratum(label.clone()))
                .map_err(|_| Error::InvalidCsv {
                    line: None,
                    message: format!("stratum '{label}' has zero total count"),
                })
        })
        .collect()
}

fn missing_column(name: &str) -> Error {
    Error::InvalidCsv {
        line: None,
        message: format!("missing required column '{name}'"),
    }
}

fn parse_binary(field: Option<&str>, name: &str, line: Option<u64>) -> Result<u8> {
    match field {
        Some("0") => Ok(0),
        Some("1") => Ok(1),
        other => Err(Error::InvalidCsv {
            line,
            message: format!("{name} must be 0 or 1, got {:?}", other.unwrap_or("")),
        }),
    }
}

fn parse_count(field: Option<&str>, line: Option<u64>) -> Result<u64> {
    field
        .unwrap_or("")
        .parse::<u64>()
        .map_err(|_| Error::InvalidCsv {
            line,
            message: format!("count must be a non-negative integer, got {:?}", field.unwrap_or("")),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table_30_70_20_80() -> ContingencyTable {
        ContingencyTable::new(30, 70, 20, 80).unwrap()
    }

    #[test]
    fn risk_ratio_point_estimate() {
        let rr = estimate_risk_ratio(&table_30_70_20_80(), false).unwrap();
        assert_relative_eq!(rr.estimate(), 1.5, max_relative = 1e-12);
        assert_eq!(rr.scale(), RatioScale::RiskRatio);
    }

    #[test]
    fn risk_ratio_wald_limits_match_reference_routine() {
        // statsmodels Table2x2([[30, 70], [20, 80]]).riskratio_confint()
        let rr = estimate_risk_ratio(&table_30_70_20_80(), false).unwrap();
        let (lo, hi) = rr.ci().unwrap();
        assert_relative_eq!(lo, 0.9159608293223658, max_relative = 1e-6);
        assert_relative_eq!(hi, 2.4564369217235686, max_relative = 1e-6);
    }

    #[test]
    fn odds_ratio_estimate_and_limits() {
        // statsmodels Table2x2([[30, 70], [20, 80]]).oddsratio_confint()
        let or = estimate_odds_ratio(&table_30_70_20_80(), false).unwrap();
        assert_relative_eq!(or.estimate(), 1.7142857142857142, max_relative = 1e-12);
        let (lo, hi) = or.ci().unwrap();
        assert_relative_eq!(lo, 0.8945793467266191, max_relative = 1e-6);
        assert_relative_eq!(hi, 3.285092061377714, max_relative = 1e-6);
    }

    #[test]
    fn symmetric_table_is_null() {
        let t = ContingencyTable::new(25, 75, 25, 75).unwrap();
        assert_eq!(estimate_risk_ratio(&t, false).unwrap().estimate(), 1.0);
        assert_eq!(estimate_odds_ratio(&t, false).unwrap().estimate(), 1.0);
    }

    #[test]
    fn zero_cell_without_haldane_is_an_error() {
        let t = ContingencyTable::new(0, 10, 5, 5).unwrap();
        assert_eq!(
            estimate_risk_ratio(&t, false),
            Err(Error::ZeroCell { cell: "n11" })
        );
    }

    #[test]
    fn zero_cell_with_haldane_uses_corrected_counts() {
        // (0.5/11)/(5.5/11) and (0.5*5.5)/(10.5*5.5)
        let t = ContingencyTable::new(0, 10, 5, 5).unwrap();
        let rr = estimate_risk_ratio(&t, true).unwrap();
        assert_relative_eq!(rr.estimate(), (0.5 / 11.0) / (5.5 / 11.0), max_relative = 1e-12);
        let or = estimate_odds_ratio(&t, true).unwrap();
        assert_relative_eq!(or.estimate(), (0.5 * 5.5) / (10.5 * 5.5), max_relative = 1e-12);
    }

    #[test]
    fn haldane_leaves_nonzero_tables_untouched() {
        let with = estimate_odds_ratio(&table_30_70_20_80(), true).unwrap();
        let without = estimate_odds_ratio(&table_30_70_20_80(), false).unwrap();
        assert_eq!(with, without);
    }

    #[test]
    fn empty_margin_reported_before_zero_cell() {
        let t = ContingencyTable::new(0, 0, 5, 5).unwrap();
        assert_eq!(
            estimate_risk_ratio(&t, false),
            Err(Error::EmptyMargin { arm: "exposed" })
        );
    }

    #[test]
    fn null_direction_branches() {
        let causative = ObservedAssociation::new(1.51, RatioScale::OddsRatio).unwrap();
        let null = ObservedAssociation::new(1.0, RatioScale::RiskRatio).unwrap();
        let preventive = ObservedAssociation::new(0.8, RatioScale::RiskRatio).unwrap();
        assert_eq!(null_direction(&causative), AssociationDirection::Causative);
        assert_eq!(null_direction(&null), AssociationDirection::Null);
        assert_eq!(null_direction(&preventive), AssociationDirection::Preventive);
    }

    #[test]
    fn association_rejects_bad_inputs() {
        assert!(ObservedAssociation::new(0.0, RatioScale::RiskRatio).is_err());
        assert!(ObservedAssociation::new(-2.0, RatioScale::RiskRatio).is_err());
        assert!(ObservedAssociation::new(f64::NAN, RatioScale::RiskRatio).is_err());
        assert!(ObservedAssociation::with_ci(1.5, RatioScale::RiskRatio, 1.6, 2.0).is_err());
        assert!(ObservedAssociation::with_ci(1.5, RatioScale::RiskRatio, 1.0, 1.4).is_err());
        assert!(ObservedAssociation::with_ci(1.5, RatioScale::RiskRatio, 1.2, 2.0).is_ok());
    }

    #[test]
    fn true_model_requires_interior_probabilities() {
        assert!(TrueBinaryModel::new(0.0, 0.5).is_err());
        assert!(TrueBinaryModel::new(0.5, 1.0).is_err());
        let m = TrueBinaryModel::new(0.4, 0.2).unwrap();
        assert_relative_eq!(m.risk_ratio(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(m.odds_ratio(), (0.4 / 0.6) / (0.2 / 0.8), max_relative = 1e-12);
    }

    #[test]
    fn csv_single_stratum_defaults_to_all() {
        let data = "exposure,outcome,count\n1,1,30\n1,0,70\n0,1,20\n0,0,80\n";
        let tables = tables_from_csv(data.as_bytes()).unwrap();
        assert_eq!(tables.len(), 1);
        assert_eq!(tables[0].counts(), (30, 70, 20, 80));
        assert_eq!(tables[0].stratum(), Some("all"));
    }

    #[test]
    fn csv_accumulates_repeated_cells_and_splits_strata() {
        let data = "exposure,outcome,count,stratum\n\
                    1,1,10,b\n1,1,20,b\n1,0,70,b\n0,1,20,b\n0,0,80,b\n\
                    1,1,1,a\n1,0,2,a\n0,1,3,a\n0,0,4,a\n";
        let tables = tables_from_csv(data.as_bytes()).unwrap();
        assert_eq!(tables.len(), 2);
        assert_eq!(tables[0].stratum(), Some("a"));
        assert_eq!(tables[0].counts(), (1, 2, 3, 4));
        assert_eq!(tables[1].stratum(), Some("b"));
        assert_eq!(tables[1].counts(), (30, 70, 20, 80));
    }

    #[test]
    fn csv_rejects_bad_codes_and_missing_columns() {
        let bad_code = "exposure,outcome,count\n2,1,30\n";
        assert!(matches!(
            tables_from_csv(bad_code.as_bytes()),
            Err(Error::InvalidCsv { .. })
        ));
        let missing = "exposure,count\n1,30\n";
        assert!(matches!(
            tables_from_csv(missing.as_bytes()),
            Err(Error::InvalidCsv { .. })
        ));
        let bad_count = "exposure,outcome,count\n1,1,-3\n";
        assert!(matches!(
            tables_from_csv(bad_count.as_bytes()),
            Err(Error::InvalidCsv { .. })
        ));
    }

    #[test]
    fn wald_limits_bracket_the_estimate() {
        let t = ContingencyTable::new(7, 2, 11, 13).unwrap();
        for assoc in [
            estimate_risk_ratio(&t, false).unwrap(),
            estimate_odds_ratio(&t, false).unwrap(),
        ] {
            let (lo, hi) = assoc.ci().unwrap();
            assert!(lo <= assoc.estimate() && assoc.estimate() <= hi);
        }
    }
}
