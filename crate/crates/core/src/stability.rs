//! Uniform-stability rate schedules.
//!
//! The estimator needs a deterministic sequence `sigma_t` bounding how much
//! the loss of the learned function can move between consecutive steps.
//! For the usual online learners only the decay order is known, so a schedule
//! is a rate `r(t)` together with a multiplicative constant: `sigma_t = c * r(t)`.
//!
//! | learner family                      | rate kind                      |
//! |-------------------------------------|--------------------------------|
//! | follow-the-leader, Polyak averaging | [`RateKind::InverseT`]         |
//! | FTRL, dual averaging                | [`RateKind::InverseSqrtT`]     |
//! | mirror descent, Hedge, implicit     | [`RateKind::LearningRate`]     |
//! | a fixed function                    | [`RateKind::Zero`]             |

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, Error, Result};

/// Learning-rate schedule `eta_t = eta0 * t^(-power)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningRate {
    pub eta0: f64,
    #[serde(default = "default_power")]
    pub power: f64,
}

fn default_power() -> f64 {
    0.5
}

impl LearningRate {
    pub fn new(eta0: f64, power: f64) -> Result<Self> {
        check_positive("eta0", eta0)?;
        check_non_negative("power", power)?;
        Ok(Self { eta0, power })
    }

    /// `eta0 / sqrt(t)`.
    pub fn inverse_sqrt(eta0: f64) -> Result<Self> {
        Self::new(eta0, 0.5)
    }

    pub fn at(&self, t: u64) -> f64 {
        self.eta0 * (t as f64).powf(-self.power)
    }
}

/// Decay order of the stability bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rate", rename_all = "snake_case")]
pub enum RateKind {
    InverseT,
    InverseSqrtT,
    /// Proportional to the learner's own step size.
    LearningRate(LearningRate),
    Zero,
    /// Externally supplied trace; `table[t - 1]` is used at step `t` and the
    /// final entry persists past the end.
    CustomTable { table: Vec<f64> },
}

impl RateKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "inverse_t" => Some(RateKind::InverseT),
            "inverse_sqrt_t" => Some(RateKind::InverseSqrtT),
            "zero" | "constant_zero" => Some(RateKind::Zero),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RateKind::InverseT => "inverse_t",
            RateKind::InverseSqrtT => "inverse_sqrt_t",
            RateKind::LearningRate(_) => "learning_rate",
            RateKind::Zero => "zero",
            RateKind::CustomTable { .. } => "custom_table",
        }
    }
}

/// `sigma_t = c_hat * r(t)`.
///
/// Immutable once built. `c_hat` here is only the default constant; an
/// adaptively tuned estimator replaces it with its burn-in estimate and uses
/// [`StabilitySchedule::rate`] directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySchedule {
    #[serde(flatten)]
    kind: RateKind,
    #[serde(default = "default_c_hat")]
    c_hat: f64,
}

fn default_c_hat() -> f64 {
    1.0
}

impl StabilitySchedule {
    pub fn new(kind: RateKind, c_hat: f64) -> Result<Self> {
        let schedule = Self { kind, c_hat };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn inverse_t(c_hat: f64) -> Result<Self> {
        Self::new(RateKind::InverseT, c_hat)
    }

    pub fn inverse_sqrt_t(c_hat: f64) -> Result<Self> {
        Self::new(RateKind::InverseSqrtT, c_hat)
    }

    pub fn zero() -> Self {
        Self {
            kind: RateKind::Zero,
            c_hat: 0.0,
        }
    }

    pub fn learning_rate(lr: LearningRate, c_hat: f64) -> Result<Self> {
        Self::new(RateKind::LearningRate(lr), c_hat)
    }

    pub fn custom(table: Vec<f64>) -> Result<Self> {
        Self::new(RateKind::CustomTable { table }, 1.0)
    }

    /// Checks the constant and any embedded table; deserialized schedules
    /// should be validated before use.
    pub fn validate(&self) -> Result<()> {
        check_non_negative("c_hat", self.c_hat)?;
        match &self.kind {
            RateKind::LearningRate(lr) => {
                check_positive("eta0", lr.eta0)?;
                check_non_negative("power", lr.power)?;
            }
            RateKind::CustomTable { table } => {
                if table.is_empty() {
                    return Err(Error::invalid("custom stability table is empty"));
                }
                for &v in table {
                    check_non_negative("stability table entry", v)?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn kind(&self) -> &RateKind {
        &self.kind
    }

    pub fn c_hat(&self) -> f64 {
        self.c_hat
    }

    pub fn with_c_hat(mut self, c_hat: f64) -> Result<Self> {
        check_non_negative("c_hat", c_hat)?;
        self.c_hat = c_hat;
        Ok(self)
    }

    /// The bare rate `r(t)`, without the constant.
    pub fn rate(&self, t: u64) -> Result<f64> {
        if t < 1 {
            return Err(Error::invalid("step index must be >= 1"));
        }
        let tf = t as f64;
        Ok(match &self.kind {
            RateKind::InverseT => 1.0 / tf,
            RateKind::InverseSqrtT => 1.0 / tf.sqrt(),
            RateKind::LearningRate(lr) => lr.at(t),
            RateKind::Zero => 0.0,
            RateKind::CustomTable { table } => {
                let idx = (t as usize - 1).min(table.len() - 1);
                table[idx]
            }
        })
    }

    /// `sigma_t = c_hat * r(t)`.
    pub fn sigma_at(&self, t: u64) -> Result<f64> {
        Ok(self.c_hat * self.rate(t)?)
    }
}
