use crate::domain::RatioScale;

/// Errors produced by validation, estimation, and verification.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A probability parameter fell outside the open interval (0, 1).
    #[error("{name} = {value} must lie strictly inside (0, 1)")]
    InvalidProbability { name: &'static str, value: f64 },

    /// A numeric parameter failed a stated requirement.
    #[error("{name} = {value}: {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// A contingency-table cell is zero and the Haldane correction was not requested.
    #[error("cell {cell} is zero; pass the Haldane flag to add 0.5 to every cell")]
    ZeroCell { cell: &'static str },

    /// An exposure arm of the table has zero total count.
    #[error("the {arm} arm has zero total count")]
    EmptyMargin { arm: &'static str },

    /// An association was supplied on the wrong ratio scale.
    #[error("expected a {expected} association, got {found}")]
    ScaleMismatch {
        expected: RatioScale,
        found: RatioScale,
    },

    /// The observed association is exactly 1, so there is nothing to explain away.
    #[error("observed association is exactly 1; no differential error is needed")]
    AlreadyNull,

    /// The shift target is not between 1 and the observed estimate.
    #[error("target {target} is not between 1 and the observed estimate {estimate}")]
    TargetBeyondEstimate { estimate: f64, target: f64 },

    /// A confidence-interval threshold was requested without confidence limits.
    #[error("observed association carries no confidence limits")]
    MissingInterval,

    /// gamma2 = 0 would make the outcome correction divide by zero.
    #[error("gamma2 must be nonzero and finite")]
    DegenerateGamma2,

    /// A bound-curve range was empty, inverted, or started below 1.
    #[error("curve range ({min}, {max}, {steps} steps): {requirement}")]
    InvalidCurveRange {
        min: f64,
        max: f64,
        steps: u32,
        requirement: &'static str,
    },

    /// A CSV record could not be parsed into table counts.
    #[error("csv input{}: {message}", line.map(|l| format!(" (record {l})")).unwrap_or_default())]
    InvalidCsv { line: Option<u64>, message: String },

    /// A certified inequality failed; carries the first counterexample in
    /// grid enumeration order.
    #[error(
        "{theorem} violated at case {case_index}: {detail}; parameters {}",
        format_params(parameters)
    )]
    VerificationFailure {
        theorem: String,
        case_index: u64,
        parameters: Vec<(&'static str, f64)>,
        detail: String,
    },
}

fn format_params(params: &[(&'static str, f64)]) -> String {
    params
        .iter()
        .map(|(name, value)| format!("{name}={value}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let line = match err.kind() {
            csv::ErrorKind::Deserialize { pos, .. } => pos.as_ref().map(|p| p.record()),
            _ => err.position().map(|p| p.record()),
        };
        Error::InvalidCsv {
            line,
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
