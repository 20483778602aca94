//! With a frozen model the recursion collapses to the running mean of the
//! observed losses, and the variance bound shrinks like b^2 / t.
//!
//! ```text
//! cargo run --example running_mean
//! ```

use oeuvre::estimator::{LossObservation, Oeuvre};
use oeuvre::stability::StabilitySchedule;
use oeuvre::tasks::StaticTask;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> oeuvre::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut task = StaticTask::new(2.0, 5.0, 1)?;
    let mut est = Oeuvre::fixed(StabilitySchedule::zero(), 1.0)?;

    let mut sum = 0.0;
    println!("{:>6} {:>10} {:>10} {:>10}", "t", "estimate", "mean", "ci95");
    for t in 1..=5000u64 {
        let step = task.step(&mut rng)?;
        sum += step.obs.loss_curr;
        let e = est.observe(&LossObservation::unchanged(step.obs.loss_curr)?)?;
        if t.is_power_of_two() || t == 5000 {
            let ci = est.fixed_time_ci(0.05)?;
            println!("{t:>6} {e:>10.5} {:>10.5} {:>10.5}", sum / t as f64, ci.half_width);
        }
    }
    println!("true mean loss: {:.5}", task.mean());
    Ok(())
}
