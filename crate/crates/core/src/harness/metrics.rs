use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::mean_std;

/// Error of one estimate trace against the ground truth, in loss units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mae: f64,
    pub bias: f64,
}

impl Metrics {
    pub fn compute(estimates: &[f64], truth: &[f64]) -> Result<Self> {
        if estimates.is_empty() || estimates.len() != truth.len() {
            return Err(Error::invalid(format!(
                "metrics need equal, non-empty traces, got {} and {}",
                estimates.len(),
                truth.len()
            )));
        }
        let n = estimates.len() as f64;
        let (mut sq, mut abs, mut signed) = (0.0, 0.0, 0.0);
        for (e, t) in estimates.iter().zip(truth) {
            let d = e - t;
            sq += d * d;
            abs += d.abs();
            signed += d;
        }
        Ok(Self {
            rmse: (sq / n).sqrt(),
            mae: abs / n,
            bias: signed / n,
        })
    }
}

/// Mean and sample standard deviation across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        Self { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub rmse: Aggregate,
    pub mae: Aggregate,
    pub bias: Aggregate,
}

impl AggregateMetrics {
    pub fn of(per_seed: &[Metrics]) -> Self {
        let pick = |f: fn(&Metrics) -> f64| Aggregate::of(&per_seed.iter().map(f).collect::<Vec<_>>());
        Self {
            rmse: pick(|m| m.rmse),
            mae: pick(|m| m.mae),
            bias: pick(|m| m.bias),
        }
    }
}
