//! Tracks the expected loss of a Hedge learner step by step, next to an EMA
//! baseline.
//!
//! ```text
//! cargo run --example hedge_tracking
//! ```

use oeuvre::baselines::{BaselineEstimator, BaselineKind};
use oeuvre::estimator::{Oeuvre, DEFAULT_BURN_IN, DEFAULT_EPS_FLOOR};
use oeuvre::stability::StabilitySchedule;
use oeuvre::tasks::{HedgeLosses, HedgeTask};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> oeuvre::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut task = HedgeTask::new(20, HedgeLosses::Bernoulli, &mut rng)?;
    let mut est = Oeuvre::adaptive(StabilitySchedule::inverse_sqrt_t(1.0)?, DEFAULT_BURN_IN, DEFAULT_EPS_FLOOR)?;
    let mut ema = BaselineEstimator::new(BaselineKind::Ema { decay: 0.01 })?;

    let (mut se_est, mut se_ema) = (0.0, 0.0);
    let horizon = 3000;
    println!("{:>5} {:>8} {:>8} {:>8}", "t", "truth", "oeuvre", "ema");
    for t in 1..=horizon {
        let step = task.step(&mut rng)?;
        let e = est.observe(&step.obs)?;
        let m = ema.update(step.obs.loss_curr)?;
        se_est += (e - step.truth).powi(2);
        se_ema += (m - step.truth).powi(2);
        if t % 300 == 0 {
            println!("{t:>5} {:>8.4} {e:>8.4} {m:>8.4}", step.truth);
        }
    }
    let st = est.state();
    println!("b_hat {:.4}  c_hat {:.4}", st.b_hat(), st.c_hat());
    println!(
        "rmse oeuvre {:.5}, ema {:.5}",
        (se_est / horizon as f64).sqrt(),
        (se_ema / horizon as f64).sqrt()
    );
    Ok(())
}
