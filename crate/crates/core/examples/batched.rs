//! Mini-batch losses: each observation is the mean over B samples, which
//! shrinks the effective loss scale by sqrt(B).
//!
//! ```text
//! cargo run --example batched -- [batch_size]
//! ```

use oeuvre::estimator::{LossObservation, Oeuvre};
use oeuvre::stability::StabilitySchedule;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let batch: u32 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(16);
    let beta = Beta::new(2.0, 5.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    let mut single = Oeuvre::fixed(StabilitySchedule::zero(), 1.0)?;
    let mut batched = Oeuvre::fixed(StabilitySchedule::zero(), 1.0)?;
    for t in 1..=200u64 {
        let losses: Vec<f64> = (0..batch).map(|_| beta.sample(&mut rng)).collect();
        let mean = losses.iter().sum::<f64>() / batch as f64;
        single.observe(&LossObservation::unchanged(losses[0])?)?;
        batched.observe(&LossObservation::batched(mean, mean, batch)?)?;
        if t % 50 == 0 {
            println!(
                "t={t:<4} single {:.4} ±{:.4}   batch of {batch} {:.4} ±{:.4}",
                single.estimate().unwrap_or(f64::NAN),
                single.fixed_time_ci(0.05)?.half_width,
                batched.estimate().unwrap_or(f64::NAN),
                batched.fixed_time_ci(0.05)?.half_width,
            );
        }
    }
    println!("true mean {:.4}", 2.0 / 7.0);
    Ok(())
}
