use crate::error::Result;
use crate::estimator::LossObservation;

/// An online learner evaluated before and after each update.
pub trait Learner {
    type Sample;

    /// Loss of the current model on `sample`.
    fn loss(&self, sample: &Self::Sample) -> f64;

    /// One training step on `sample`; `t` is the global step index.
    fn update(&mut self, sample: &Self::Sample, t: u64);
}

/// Drives a learner in prequential order: the incoming sample is scored by
/// the current model, the model is trained on the previous sample, and the
/// incoming sample is scored again.
///
/// After step `t` the model has seen `z_1 .. z_{t-1}`, so `z_t` is always a
/// fresh sample for the loss reported as `loss_curr`.
#[derive(Debug, Clone)]
pub struct Prequential<L: Learner> {
    learner: L,
    pending: Option<L::Sample>,
    t: u64,
}

impl<L: Learner> Prequential<L> {
    pub fn new(learner: L) -> Self {
        Self {
            learner,
            pending: None,
            t: 0,
        }
    }

    pub fn learner(&self) -> &L {
        &self.learner
    }

    pub fn learner_mut(&mut self) -> &mut L {
        &mut self.learner
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, sample: L::Sample) -> Result<LossObservation> {
        self.t += 1;
        let loss_prev = self.learner.loss(&sample);
        if let Some(prior) = self.pending.take() {
            self.learner.update(&prior, self.t);
        }
        let loss_curr = self.learner.loss(&sample);
        self.pending = Some(sample);
        LossObservation::new(loss_curr, loss_prev)
    }
}
