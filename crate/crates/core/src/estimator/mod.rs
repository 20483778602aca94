//! The recursive loss estimator.
//!
//! Each step consumes the incoming sample's loss under the current model and
//! under the previous model and updates
//!
//! ```text
//! L_t = loss_curr + (1 - gamma_t) * (L_{t-1} - loss_prev)
//! ```
//!
//! The previous model's evaluation acts as a control variate for the carried
//! over estimate. `gamma_t` is chosen from a deterministic variance bound that
//! depends on the learner's stability schedule (see [`crate::stability`]).

mod bounds;
mod state;
mod weights;

use serde::{Deserialize, Serialize};

pub use bounds::{
    fixed_time_ci, fixed_time_half_width, misspecification_factor, time_uniform_boundary,
    BoundKind, BoundLevel, ConfidenceBound,
};
pub use state::{
    Diagnostics, EstimatorState, LossObservation, Phase, DEFAULT_BURN_IN, DEFAULT_B_HAT,
    DEFAULT_C_HAT, DEFAULT_EPS_FLOOR, DEGENERATE_RESET_RUN,
};
pub use weights::{gamma_optimal, optimal_variance, variance_step, WeightPolicy};

use crate::error::Result;
use crate::stability::StabilitySchedule;

/// Serializable estimator settings.
///
/// With `adaptive` set the constants are estimated during a burn-in of
/// `burn_in` steps; otherwise `b_hat` and the schedule's `c_hat` are used
/// as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OeuvreConfig {
    /// Falls back to the task's natural schedule when absent.
    #[serde(default)]
    pub schedule: Option<StabilitySchedule>,
    #[serde(default)]
    pub policy: WeightPolicy,
    #[serde(default = "default_true")]
    pub adaptive: bool,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_b_hat")]
    pub b_hat: f64,
}

fn default_true() -> bool {
    true
}
fn default_burn_in() -> u64 {
    DEFAULT_BURN_IN
}
fn default_eps() -> f64 {
    DEFAULT_EPS_FLOOR
}
fn default_b_hat() -> f64 {
    DEFAULT_B_HAT
}

impl Default for OeuvreConfig {
    fn default() -> Self {
        Self {
            schedule: None,
            policy: WeightPolicy::Optimal,
            adaptive: true,
            burn_in: DEFAULT_BURN_IN,
            eps: DEFAULT_EPS_FLOOR,
            b_hat: DEFAULT_B_HAT,
        }
    }
}

/// Estimator plus the schedule and policy that drive it.
#[derive(Debug, Clone)]
pub struct Oeuvre {
    state: EstimatorState,
    schedule: StabilitySchedule,
    policy: WeightPolicy,
}

impl Oeuvre {
    pub fn adaptive(schedule: StabilitySchedule, burn_in: u64, eps: f64) -> Result<Self> {
        Ok(Self {
            state: EstimatorState::adaptive(burn_in, eps)?,
            schedule,
            policy: WeightPolicy::Optimal,
        })
    }

    /// Known constants: `b_hat` here, `c_hat` from the schedule.
    pub fn fixed(schedule: StabilitySchedule, b_hat: f64) -> Result<Self> {
        Ok(Self {
            state: EstimatorState::fixed(b_hat, schedule.c_hat())?,
            schedule,
            policy: WeightPolicy::Optimal,
        })
    }

    pub fn from_config(config: &OeuvreConfig, default_schedule: &StabilitySchedule) -> Result<Self> {
        let schedule = config
            .schedule
            .clone()
            .unwrap_or_else(|| default_schedule.clone());
        schedule.validate()?;
        let est = if config.adaptive {
            Self::adaptive(schedule, config.burn_in, config.eps)?
        } else {
            Self::fixed(schedule, config.b_hat)?
        };
        Ok(est.with_policy(config.policy))
    }

    pub fn with_policy(mut self, policy: WeightPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn state(&self) -> &EstimatorState {
        &self.state
    }

    pub fn schedule(&self) -> &StabilitySchedule {
        &self.schedule
    }

    pub fn policy(&self) -> &WeightPolicy {
        &self.policy
    }

    pub fn estimate(&self) -> Option<f64> {
        self.state.estimate()
    }

    /// `sigma_t` for step `t` with the estimator's current constant.
    pub fn sigma_at(&self, t: u64) -> Result<f64> {
        Ok(self.state.c_hat() * self.schedule.rate(t)?)
    }

    pub fn observe(&mut self, obs: &LossObservation) -> Result<f64> {
        self.observe_with_sigma(obs, None)
    }

    /// Like [`Oeuvre::observe`], but `sigma_override` (when given) replaces the
    /// schedule's `sigma_t` after the burn-in.
    pub fn observe_with_sigma(
        &mut self,
        obs: &LossObservation,
        sigma_override: Option<f64>,
    ) -> Result<f64> {
        let t = self.state.t() + 1;
        match self.state.phase() {
            Phase::BurnIn => {
                let rate = self.schedule.rate(t)?;
                self.state.burn_in_update(obs, rate, &self.policy)
            }
            Phase::Running => {
                let sigma = match sigma_override {
                    Some(s) => s,
                    None => self.sigma_at(t)?,
                };
                self.state.oeuvre_update(obs, sigma, &self.policy)
            }
        }
    }

    pub fn fixed_time_ci(&self, delta: f64) -> Result<ConfidenceBound> {
        fixed_time_ci(&self.state, delta)
    }
}
