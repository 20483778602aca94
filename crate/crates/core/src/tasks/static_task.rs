use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::Step;
use crate::error::{Error, Result};
use crate::estimator::LossObservation;

/// A fixed function evaluated on i.i.d. samples: losses are `Beta(alpha,
/// beta)` draws and the model never changes, so both evaluations coincide.
#[derive(Debug, Clone)]
pub struct StaticTask {
    dist: Beta<f64>,
    mean: f64,
    batch_size: u32,
}

impl StaticTask {
    pub fn new(alpha: f64, beta: f64, batch_size: u32) -> Result<Self> {
        let dist = Beta::new(alpha, beta).map_err(|e| Error::invalid(format!("beta losses: {e}")))?;
        if batch_size == 0 {
            return Err(Error::invalid("batch_size must be >= 1"));
        }
        Ok(Self {
            dist,
            mean: alpha / (alpha + beta),
            batch_size,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn batch_size(&self) -> u32 {
        self.batch_size
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Step> {
        let total: f64 = (0..self.batch_size).map(|_| self.dist.sample(rng)).sum();
        let loss = total / f64::from(self.batch_size);
        Ok(Step {
            obs: LossObservation::batched(loss, loss, self.batch_size)?,
            truth: self.mean,
        })
    }
}
