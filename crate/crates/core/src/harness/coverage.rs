use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, SeedFailure, OEUVRE_COLUMN};
use crate::error::{Error, Result};
use crate::estimator::{fixed_time_half_width, time_uniform_boundary, Oeuvre};
use crate::stats::mean_std;
use crate::tasks::{TaskFactory, TaskSpec};

pub const MIN_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSettings {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Steps at which the fixed-time interval is checked; defaults to the
    /// quartiles of the horizon that fall after the burn-in.
    #[serde(default)]
    pub checkpoints: Option<Vec<u64>>,
    /// Exponent of the time-uniform boundary; `ln(2 / delta)` when absent.
    #[serde(default)]
    pub c: Option<f64>,
}

fn default_delta() -> f64 {
    0.05
}
fn default_replications() -> usize {
    1000
}

impl Default for CoverageSettings {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            replications: default_replications(),
            checkpoints: None,
            c: None,
        }
    }
}

impl CoverageSettings {
    pub fn validate(&self, horizon: u64) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("coverage delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::Config(format!(
                "coverage needs at least {MIN_REPLICATIONS} replications, got {}",
                self.replications
            )));
        }
        if let Some(cps) = &self.checkpoints {
            if cps.is_empty() || cps.iter().any(|&t| t == 0 || t > horizon) {
                return Err(Error::Config(format!("checkpoints must lie in 1..={horizon}")));
            }
        }
        if let Some(c) = self.c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("coverage c must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn c_value(&self) -> f64 {
        self.c.unwrap_or_else(|| (2.0 / self.delta).ln())
    }

    /// Checkpoints, sorted, and all at or after `first_running`.
    fn resolve_checkpoints(&self, horizon: u64, first_running: u64) -> Result<Vec<u64>> {
        let mut cps = match &self.checkpoints {
            Some(c) => c.clone(),
            None => (1..=4u64)
                .map(|q| (horizon * q / 4).max(first_running))
                .filter(|&t| t <= horizon)
                .collect(),
        };
        cps.sort_unstable();
        cps.dedup();
        if let Some(&t) = cps.iter().find(|&&t| t < first_running) {
            return Err(Error::Config(format!(
                "checkpoint {t} falls inside the burn-in (bounds start at step {first_running})"
            )));
        }
        Ok(cps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointCoverage {
    pub t: u64,
    pub coverage: f64,
    pub mean_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformCoverage {
    pub coverage: f64,
    /// `1 - 2 exp(-c)`.
    pub nominal: f64,
    pub mean_final_width: f64,
}

/// Errors at the horizon divided by `sqrt(V_T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedErrors {
    pub mean: f64,
    pub std: f64,
    pub max_abs: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub task: TaskSpec,
    pub horizon: u64,
    pub delta: f64,
    pub c: f64,
    pub replications: usize,
    pub completed: usize,
    pub fixed_time: Vec<CheckpointCoverage>,
    pub time_uniform: UniformCoverage,
    pub normalized: NormalizedErrors,
    pub failures: Vec<SeedFailure>,
}

struct Replication {
    half_widths: Vec<f64>,
    covered: Vec<bool>,
    uniform_covered: bool,
    final_width: f64,
    normalized: f64,
}

fn replicate(
    factory: &TaskFactory,
    config: &ExperimentConfig,
    checkpoints: &[u64],
    delta: f64,
    c: f64,
    seed: u64,
) -> Result<std::result::Result<Replication, SeedFailure>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut task = factory.build(&mut rng)?;
    let mut est = Oeuvre::from_config(&config.oeuvre, &config.task.default_schedule())?;
    let fail = |step: u64, source: &str, message: String| {
        Ok(Err(SeedFailure {
            seed,
            step,
            source: source.into(),
            message,
        }))
    };

    // (V, Gamma) and the error since the current martingale started
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut errors: Vec<f64> = Vec::new();
    let mut half_widths = Vec::with_capacity(checkpoints.len());
    let mut covered = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0;

    for t in 1..=config.horizon {
        let step = match task.step(&mut rng) {
            Ok(s) => s,
            Err(e) => return fail(t, "task", e.to_string()),
        };
        let estimate = match est.observe(&step.obs) {
            Ok(v) if v.is_finite() => v,
            Ok(v) => return fail(t, OEUVRE_COLUMN, format!("non-finite estimate {v}")),
            Err(e) => return fail(t, OEUVRE_COLUMN, e.to_string()),
        };
        let st = est.state();
        if !st.is_running() {
            continue;
        }
        if st.steps_since_reset() == 1 {
            history.clear();
            errors.clear();
        }
        let err = estimate - step.truth;
        history.push((st.var_bound(), st.gamma_prod()));
        errors.push(err);
        if next_cp < checkpoints.len() && checkpoints[next_cp] == t {
            let h = fixed_time_half_width(st.var_bound(), delta)?;
            half_widths.push(h);
            covered.push(err.abs() <= h);
            next_cp += 1;
        }
    }

    let boundary = time_uniform_boundary(&history, history.len(), c)?;
    let uniform_covered = errors.iter().zip(&boundary).all(|(e, h)| e.abs() <= *h);
    let (v_end, _) = history[history.len() - 1];
    Ok(Ok(Replication {
        half_widths,
        covered,
        uniform_covered,
        final_width: boundary[boundary.len() - 1],
        normalized: errors[errors.len() - 1] / v_end.sqrt(),
    }))
}

/// Empirical coverage of the fixed-time interval at each checkpoint and of
/// the time-uniform boundary over the whole horizon, across independent
/// replications seeded from the first configured seed upwards.
pub fn coverage_study(config: &ExperimentConfig) -> Result<CoverageReport> {
    config.validate()?;
    let settings = &config.coverage;
    let factory = TaskFactory::new(&config.task)?;
    let first_running = if config.oeuvre.adaptive { config.oeuvre.burn_in } else { 1 };
    let checkpoints = settings.resolve_checkpoints(config.horizon, first_running)?;
    let (delta, c) = (settings.delta, settings.c_value());
    let base = config.seeds[0];

    let results = (0..settings.replications as u64)
        .into_par_iter()
        .map(|r| replicate(&factory, config, &checkpoints, delta, c, base.wrapping_add(r)))
        .collect::<Result<Vec<_>>>()?;

    let mut done = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rep) => done.push(rep),
            Err(f) => failures.push(f),
        }
    }
    if done.is_empty() {
        return Err(Error::State("every coverage replication failed".into()));
    }
    let n = done.len() as f64;
    let fixed_time = checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| CheckpointCoverage {
            t,
            coverage: done.iter().filter(|r| r.covered[i]).count() as f64 / n,
            mean_half_width: done.iter().map(|r| r.half_widths[i]).sum::<f64>() / n,
        })
        .collect();
    let values: Vec<f64> = done.iter().map(|r| r.normalized).collect();
    let (mean, std) = mean_std(&values);
    Ok(CoverageReport {
        task: config.task.clone(),
        horizon: config.horizon,
        delta,
        c,
        replications: settings.replications,
        completed: done.len(),
        fixed_time,
        time_uniform: UniformCoverage {
            coverage: done.iter().filter(|r| r.uniform_covered).count() as f64 / n,
            nominal: 1.0 - 2.0 * (-c).exp(),
            mean_final_width: done.iter().map(|r| r.final_width).sum::<f64>() / n,
        },
        normalized: NormalizedErrors {
            mean,
            std,
            max_abs: values.iter().fold(0.0, |m, v| m.max(v.abs())),
            values,
        },
        failures,
    })
}
