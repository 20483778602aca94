use rand::Rng;
use rand_distr::{Bernoulli, Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::prequential::{Learner, Prequential};
use super::Step;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HedgeLosses {
    /// Expert `i` loses 1 with probability `p_i ~ U(0.01, 0.99)`.
    Bernoulli,
    /// Expert `i` draws from `Beta(a_i, b_i)` with integer shapes in `1..=9`.
    Beta,
}

#[derive(Debug, Clone)]
enum ExpertDist {
    Bernoulli(Bernoulli),
    Beta(Beta<f64>),
}

impl ExpertDist {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ExpertDist::Bernoulli(d) => f64::from(u8::from(d.sample(rng))),
            ExpertDist::Beta(d) => d.sample(rng),
        }
    }
}

/// Multiplicative weights with `eta_t = sqrt(ln K / t)`. Weights are kept in
/// log space so long runs cannot underflow.
#[derive(Debug, Clone)]
pub struct Hedge {
    log_w: Vec<f64>,
    p: Vec<f64>,
}

impl Hedge {
    pub fn new(experts: usize) -> Result<Self> {
        if experts == 0 {
            return Err(Error::invalid("hedge needs at least one expert"));
        }
        Ok(Self {
            log_w: vec![0.0; experts],
            p: vec![1.0 / experts as f64; experts],
        })
    }

    pub fn distribution(&self) -> &[f64] {
        &self.p
    }

    /// One multiplicative step with an explicit learning rate.
    pub fn apply(&mut self, losses: &[f64], eta: f64) {
        for (lw, l) in self.log_w.iter_mut().zip(losses) {
            *lw -= eta * l;
        }
        let top = self.log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (p, lw) in self.p.iter_mut().zip(&self.log_w) {
            *p = (lw - top).exp();
            total += *p;
        }
        for p in &mut self.p {
            *p /= total;
        }
    }
}

impl Learner for Hedge {
    type Sample = Vec<f64>;

    fn loss(&self, losses: &Vec<f64>) -> f64 {
        self.p.iter().zip(losses).map(|(p, l)| p * l).sum()
    }

    fn update(&mut self, losses: &Vec<f64>, t: u64) {
        let eta = ((self.p.len() as f64).ln() / t as f64).sqrt();
        self.apply(losses, eta);
    }
}

#[derive(Debug, Clone)]
pub struct HedgeTask {
    dists: Vec<ExpertDist>,
    mean_losses: Vec<f64>,
    driver: Prequential<Hedge>,
}

impl HedgeTask {
    pub fn new<R: Rng + ?Sized>(experts: usize, losses: HedgeLosses, rng: &mut R) -> Result<Self> {
        if experts == 0 {
            return Err(Error::invalid("hedge needs at least one expert"));
        }
        let mut dists = Vec::with_capacity(experts);
        let mut mean_losses = Vec::with_capacity(experts);
        for _ in 0..experts {
            match losses {
                HedgeLosses::Bernoulli => {
                    let p = rng.random_range(0.01..0.99);
                    dists.push(ExpertDist::Bernoulli(
                        Bernoulli::new(p).map_err(|e| Error::invalid(e.to_string()))?,
                    ));
                    mean_losses.push(p);
                }
                HedgeLosses::Beta => {
                    let a = f64::from(rng.random_range(1..=9u8));
                    let b = f64::from(rng.random_range(1..=9u8));
                    dists.push(ExpertDist::Beta(
                        Beta::new(a, b).map_err(|e| Error::invalid(e.to_string()))?,
                    ));
                    mean_losses.push(a / (a + b));
                }
            }
        }
        Ok(Self {
            dists,
            mean_losses,
            driver: Prequential::new(Hedge::new(experts)?),
        })
    }

    pub fn experts(&self) -> usize {
        self.dists.len()
    }

    pub fn mean_losses(&self) -> &[f64] {
        &self.mean_losses
    }

    pub fn distribution(&self) -> &[f64] {
        self.driver.learner().distribution()
    }

    pub fn truth(&self) -> f64 {
        self.driver.learner().loss(&self.mean_losses)
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Step> {
        let losses: Vec<f64> = self.dists.iter().map(|d| d.sample(rng)).collect();
        let obs = self.driver.step(losses)?;
        Ok(Step {
            obs,
            truth: self.truth(),
        })
    }
}
