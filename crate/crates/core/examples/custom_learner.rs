//! Plugging your own online learner into the estimator through the
//! prequential driver.
//!
//! The learner here predicts a scalar by its running average and is scored
//! with a clipped squared error, so its stability decays like 1/t.
//!
//! ```text
//! cargo run --example custom_learner
//! ```

use oeuvre::estimator::{Oeuvre, DEFAULT_BURN_IN, DEFAULT_EPS_FLOOR};
use oeuvre::stability::StabilitySchedule;
use oeuvre::tasks::{Learner, Prequential};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct RunningAverage {
    value: f64,
}

impl Learner for RunningAverage {
    type Sample = f64;

    fn loss(&self, x: &f64) -> f64 {
        (x - self.value).powi(2).min(4.0)
    }

    fn update(&mut self, x: &f64, t: u64) {
        self.value += (x - self.value) / t as f64;
    }
}

fn main() -> oeuvre::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let noise = Normal::new(0.7, 0.5).expect("valid normal");
    let mut driver = Prequential::new(RunningAverage { value: 0.0 });
    let mut est = Oeuvre::adaptive(StabilitySchedule::inverse_t(1.0)?, DEFAULT_BURN_IN, DEFAULT_EPS_FLOOR)?;

    for t in 1..=2000u64 {
        let obs = driver.step(noise.sample(&mut rng))?;
        let e = est.observe(&obs)?;
        if t % 250 == 0 {
            // expected squared error of a fixed prediction m is var + (mu - m)^2 (clipping ignored)
            let m = driver.learner().value;
            let approx_truth = 0.25 + (0.7 - m).powi(2);
            println!("t={t:<5} estimate {e:.4}  approx truth {approx_truth:.4}");
        }
    }
    Ok(())
}
