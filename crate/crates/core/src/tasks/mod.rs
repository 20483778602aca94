//! Synthetic online-learning tasks whose expected loss is known at every
//! step.
//!
//! Every task is driven in prequential order and yields a [`Step`]: the pair
//! of evaluations fed to the estimator and the ground truth it should track.

mod hedge;
mod linreg;
mod logreg;
mod prequential;
mod sampling;
mod static_task;

use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use hedge::{Hedge, HedgeLosses, HedgeTask};
pub use linreg::{LinRegTask, OgdLinear, DEFAULT_LINREG_ETA0, NOISE_GRID};
pub use logreg::{cross_entropy, Dataset, LogRegTask, PolyakLogistic, DEFAULT_LOGREG_ETA0};
pub use prequential::{Learner, Prequential};
pub use sampling::{sample_gaussian, sample_unit_sphere, Covariance};
pub use static_task::StaticTask;

use crate::error::{Error, Result};
use crate::estimator::LossObservation;
use crate::stability::StabilitySchedule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub obs: LossObservation,
    pub truth: f64,
}

/// Serializable task description, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    Static {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default = "default_batch")]
        batch_size: u32,
    },
    Linreg {
        dim: usize,
        #[serde(default = "default_noise")]
        noise_std: f64,
        #[serde(default = "default_linreg_eta0")]
        eta0: f64,
        /// Equicorrelation of the features; 0 gives the identity.
        #[serde(default)]
        rho: f64,
    },
    Hedge {
        experts: usize,
        losses: HedgeLosses,
    },
    Logreg {
        /// CSV reference set; a synthetic one is generated per seed when absent.
        #[serde(default)]
        data: Option<PathBuf>,
        #[serde(default = "default_rows")]
        synthetic_rows: usize,
        #[serde(default = "default_logreg_dim")]
        synthetic_dim: usize,
        #[serde(default = "default_margin")]
        synthetic_margin: f64,
        #[serde(default = "default_logreg_eta0")]
        eta0: f64,
        #[serde(default = "default_true")]
        fit_intercept: bool,
    },
}

fn default_alpha() -> f64 {
    2.0
}
fn default_beta() -> f64 {
    5.0
}
fn default_batch() -> u32 {
    1
}
fn default_noise() -> f64 {
    0.05
}
fn default_linreg_eta0() -> f64 {
    DEFAULT_LINREG_ETA0
}
fn default_logreg_eta0() -> f64 {
    DEFAULT_LOGREG_ETA0
}
fn default_rows() -> usize {
    2000
}
fn default_logreg_dim() -> usize {
    10
}
fn default_margin() -> f64 {
    2.0
}
fn default_true() -> bool {
    true
}

impl TaskSpec {
    pub fn static_beta(alpha: f64, beta: f64) -> Self {
        TaskSpec::Static {
            alpha,
            beta,
            batch_size: 1,
        }
    }

    pub fn linreg(dim: usize, noise_std: f64) -> Self {
        TaskSpec::Linreg {
            dim,
            noise_std,
            eta0: DEFAULT_LINREG_ETA0,
            rho: 0.0,
        }
    }

    pub fn hedge(experts: usize, losses: HedgeLosses) -> Self {
        TaskSpec::Hedge { experts, losses }
    }

    pub fn synthetic_logreg(rows: usize, dim: usize) -> Self {
        TaskSpec::Logreg {
            data: None,
            synthetic_rows: rows,
            synthetic_dim: dim,
            synthetic_margin: default_margin(),
            eta0: DEFAULT_LOGREG_ETA0,
            fit_intercept: true,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::Static { .. } => "static",
            TaskSpec::Linreg { .. } => "linreg",
            TaskSpec::Hedge { .. } => "hedge",
            TaskSpec::Logreg { .. } => "logreg",
        }
    }

    /// Stability order of the learner the task trains.
    pub fn default_schedule(&self) -> StabilitySchedule {
        let c_hat = 1.0;
        match self {
            TaskSpec::Static { .. } => StabilitySchedule::zero(),
            TaskSpec::Linreg { .. } | TaskSpec::Hedge { .. } => {
                StabilitySchedule::inverse_sqrt_t(c_hat).expect("positive constant")
            }
            TaskSpec::Logreg { .. } => StabilitySchedule::inverse_t(c_hat).expect("positive constant"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match *self {
            TaskSpec::Static {
                alpha,
                beta,
                batch_size,
            } => {
                if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                    return bad(format!("static task needs positive alpha and beta, got {alpha}, {beta}"));
                }
                if batch_size == 0 {
                    return bad("static task batch_size must be >= 1".into());
                }
            }
            TaskSpec::Linreg {
                dim,
                noise_std,
                eta0,
                rho,
            } => {
                if dim == 0 {
                    return bad("linreg dim must be >= 1".into());
                }
                if !(noise_std >= 0.0 && noise_std.is_finite()) {
                    return bad(format!("linreg noise_std must be non-negative, got {noise_std}"));
                }
                if !(eta0 > 0.0 && eta0.is_finite()) {
                    return bad(format!("linreg eta0 must be positive, got {eta0}"));
                }
                // equicorrelation is PSD iff -1/(d-1) <= rho <= 1
                let floor = if dim > 1 { -1.0 / (dim as f64 - 1.0) } else { f64::NEG_INFINITY };
                if !(rho <= 1.0 && rho >= floor) {
                    return bad(format!("linreg rho {rho} gives an indefinite covariance"));
                }
            }
            TaskSpec::Hedge { experts, .. } => {
                if experts == 0 {
                    return bad("hedge experts must be >= 1".into());
                }
            }
            TaskSpec::Logreg {
                ref data,
                synthetic_rows,
                synthetic_dim,
                synthetic_margin,
                eta0,
                ..
            } => {
                if data.is_none() && (synthetic_rows == 0 || synthetic_dim == 0) {
                    return bad("synthetic logreg needs rows and dim >= 1".into());
                }
                if !synthetic_margin.is_finite() {
                    return bad("synthetic logreg margin must be finite".into());
                }
                if !(eta0 > 0.0 && eta0.is_finite()) {
                    return bad(format!("logreg eta0 must be positive, got {eta0}"));
                }
            }
        }
        Ok(())
    }
}

/// Builds task instances from a spec, loading any dataset once.
#[derive(Debug, Clone)]
pub struct TaskFactory {
    spec: TaskSpec,
    dataset: Option<Arc<Dataset>>,
}

impl TaskFactory {
    pub fn new(spec: &TaskSpec) -> Result<Self> {
        spec.validate()?;
        let dataset = match spec {
            TaskSpec::Logreg { data: Some(path), .. } => Some(Arc::new(Dataset::from_csv(path)?)),
            _ => None,
        };
        Ok(Self {
            spec: spec.clone(),
            dataset,
        })
    }

    pub fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    /// A fresh task; any task-level randomness is drawn from `rng`.
    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Task> {
        Ok(match self.spec {
            TaskSpec::Static {
                alpha,
                beta,
                batch_size,
            } => Task::Static(StaticTask::new(alpha, beta, batch_size)?),
            TaskSpec::Linreg {
                dim,
                noise_std,
                eta0,
                rho,
            } => Task::Linreg(LinRegTask::new(dim, noise_std, eta0, rho, rng)?),
            TaskSpec::Hedge { experts, losses } => Task::Hedge(HedgeTask::new(experts, losses, rng)?),
            TaskSpec::Logreg {
                synthetic_rows,
                synthetic_dim,
                synthetic_margin,
                eta0,
                fit_intercept,
                ..
            } => {
                let data = match &self.dataset {
                    Some(d) => Arc::clone(d),
                    None => Arc::new(Dataset::synthetic(
                        synthetic_rows,
                        synthetic_dim,
                        synthetic_margin,
                        rng,
                    )?),
                };
                Task::Logreg(LogRegTask::new(data, eta0, fit_intercept)?)
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum Task {
    Static(StaticTask),
    Linreg(LinRegTask),
    Hedge(HedgeTask),
    Logreg(LogRegTask),
}

impl Task {
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Step> {
        match self {
            Task::Static(t) => t.step(rng),
            Task::Linreg(t) => t.step(rng),
            Task::Hedge(t) => t.step(rng),
            Task::Logreg(t) => t.step(rng),
        }
    }
}
