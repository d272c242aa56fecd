//! Corrected slope estimates for differential measurement error of
//! continuous outcomes and exposures in linear models.
//!
//! Outcome side: if the measurement follows
//! `E[Y*|a,y,c] = g0 + g1 a + g2 y + g3 c`, the slope of Y* on A satisfies
//! `b1* = g1 + g2 b1`, so the corrected slope is `(b1* - g1)/g2`. Intercept
//! and covariate terms cancel out of the correction.
//!
//! Exposure side: if `E[A*|a,y,c] = g0 + a + g1 y + g2'c` with error
//! variance `su2`, and `lambda = sa2/(sa2 + su2)` is the attenuation factor,
//! the corrected slope is `[b1* - g1/(sa2 + su2)] / lambda`. The subtracted
//! term is the outcome's direct effect on the measurement expressed in
//! measurement-variance units. The same arithmetic applies to the log-odds
//! slope of a rare binary outcome under logistic regression, where it is
//! approximate only. With `g1 = 0` this is the classical attenuation
//! correction and is exact; the verification harness certifies that case as
//! a round trip and treats `g1 != 0` as an exploratory Monte Carlo
//! comparison, since exactness there depends on the data-generating
//! assumptions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            requirement: "must be finite",
        })
    }
}

/// Observed slope and measurement-model coefficients for a continuous
/// outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ContinuousOutcomeSpecRaw")]
pub struct ContinuousOutcomeSpec {
    beta1_star: f64,
    gamma1: f64,
    gamma2: f64,
}

#[derive(Deserialize)]
struct ContinuousOutcomeSpecRaw {
    beta1_star: f64,
    gamma1: f64,
    gamma2: f64,
}

impl TryFrom<ContinuousOutcomeSpecRaw> for ContinuousOutcomeSpec {
    type Error = Error;

    fn try_from(raw: ContinuousOutcomeSpecRaw) -> Result<Self> {
        ContinuousOutcomeSpec::new(raw.beta1_star, raw.gamma1, raw.gamma2)
    }
}

impl ContinuousOutcomeSpec {
    /// `beta1_star`: slope of the mismeasured outcome on the exposure;
    /// `gamma1`: direct effect of the exposure on the measurement;
    /// `gamma2`: effect of the true outcome on the measurement (nonzero).
    pub fn new(beta1_star: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        require_finite("beta1_star", beta1_star)?;
        require_finite("gamma1", gamma1)?;
        if !gamma2.is_finite() || gamma2 == 0.0 {
            return Err(Error::DegenerateGamma2);
        }
        Ok(Self {
            beta1_star,
            gamma1,
            gamma2,
        })
    }

    pub fn beta1_star(&self) -> f64 {
        self.beta1_star
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }
}

/// Outcome model family for the exposure correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeKind {
    /// Continuous outcome, linear regression: the correction is exact for
    /// `gamma1 = 0`.
    Linear,
    /// Rare binary outcome, logistic regression: the correction is
    /// approximate.
    RareBinaryLogistic,
}

/// Observed coefficient and measurement-error structure for a continuous
/// exposure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ContinuousExposureSpecRaw")]
pub struct ContinuousExposureSpec {
    coeff_star: f64,
    gamma1: f64,
    sigma_a2: f64,
    sigma_u2: f64,
    outcome_kind: OutcomeKind,
}

#[derive(Deserialize)]
struct ContinuousExposureSpecRaw {
    coeff_star: f64,
    gamma1: f64,
    sigma_a2: f64,
    sigma_u2: f64,
    outcome_kind: OutcomeKind,
}

impl TryFrom<ContinuousExposureSpecRaw> for ContinuousExposureSpec {
    type Error = Error;

    fn try_from(raw: ContinuousExposureSpecRaw) -> Result<Self> {
        ContinuousExposureSpec::new(
            raw.coeff_star,
            raw.gamma1,
            raw.sigma_a2,
            raw.sigma_u2,
            raw.outcome_kind,
        )
    }
}

impl ContinuousExposureSpec {
    /// `coeff_star`: observed slope of the outcome on the mismeasured
    /// exposure; `gamma1`: direct effect of the outcome on the measurement;
    /// `sigma_a2 > 0` and `sigma_u2 >= 0`: true-exposure and error variances.
    pub fn new(
        coeff_star: f64,
        gamma1: f64,
        sigma_a2: f64,
        sigma_u2: f64,
        outcome_kind: OutcomeKind,
    ) -> Result<Self> {
        require_finite("coeff_star", coeff_star)?;
        require_finite("gamma1", gamma1)?;
        if !(sigma_a2.is_finite() && sigma_a2 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma_a2",
                value: sigma_a2,
                requirement: "must be a finite positive variance",
            });
        }
        if !(sigma_u2.is_finite() && sigma_u2 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma_u2",
                value: sigma_u2,
                requirement: "must be a finite non-negative variance",
            });
        }
        Ok(Self {
            coeff_star,
            gamma1,
            sigma_a2,
            sigma_u2,
            outcome_kind,
        })
    }

    pub fn coeff_star(&self) -> f64 {
        self.coeff_star
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn sigma_a2(&self) -> f64 {
        self.sigma_a2
    }

    pub fn sigma_u2(&self) -> f64 {
        self.sigma_u2
    }

    pub fn outcome_kind(&self) -> OutcomeKind {
        self.outcome_kind
    }

    /// Attenuation factor sa2/(sa2 + su2), in (0, 1].
    pub fn lambda(&self) -> f64 {
        self.sigma_a2 / (self.sigma_a2 + self.sigma_u2)
    }
}

/// Corrected exposure slope: (beta1_star - gamma1) / gamma2.
pub fn correct_beta_outcome(spec: &ContinuousOutcomeSpec) -> f64 {
    (spec.beta1_star - spec.gamma1) / spec.gamma2
}

/// Observed slope implied by a true slope under the outcome measurement
/// model: gamma1 + gamma2 * beta1. Exact inverse of [`correct_beta_outcome`].
pub fn forward_beta_star_outcome(beta1: f64, gamma1: f64, gamma2: f64) -> f64 {
    gamma1 + gamma2 * beta1
}

/// Corrected slope for a mismeasured exposure:
/// [coeff_star - gamma1/(sigma_a2 + sigma_u2)] / lambda.
pub fn correct_coeff_exposure(spec: &ContinuousExposureSpec) -> f64 {
    let total_var = spec.sigma_a2 + spec.sigma_u2;
    (spec.coeff_star - spec.gamma1 / total_var) / spec.lambda()
}
