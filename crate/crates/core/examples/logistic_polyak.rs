//! Logistic regression with Polyak averaging on a fixed reference set.
//! Pass a CSV (header row, features, then a 0/1 label) to use your own data;
//! otherwise a synthetic set is generated.
//!
//! ```text
//! cargo run --example logistic_polyak -- [data.csv]
//! ```

use std::path::Path;
use std::sync::Arc;

use oeuvre::estimator::{Oeuvre, DEFAULT_BURN_IN, DEFAULT_EPS_FLOOR};
use oeuvre::stability::StabilitySchedule;
use oeuvre::tasks::{Dataset, LogRegTask, DEFAULT_LOGREG_ETA0};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> oeuvre::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = match std::env::args().nth(1) {
        Some(path) => Dataset::from_csv(Path::new(&path))?,
        None => Dataset::synthetic(2000, 10, 2.0, &mut rng)?,
    };
    println!("{} rows, {} features", data.len(), data.dim());

    let mut task = LogRegTask::new(Arc::new(data), DEFAULT_LOGREG_ETA0, true)?;
    let mut est = Oeuvre::adaptive(StabilitySchedule::inverse_t(1.0)?, DEFAULT_BURN_IN, DEFAULT_EPS_FLOOR)?;
    for t in 1..=4000u64 {
        let step = task.step(&mut rng)?;
        let e = est.observe(&step.obs)?;
        if t % 500 == 0 {
            let ci = est.fixed_time_ci(0.05)?;
            println!(
                "t={t:<5} truth {:.4}  estimate {e:.4}  [{:.4}, {:.4}]",
                step.truth,
                ci.lower(),
                ci.upper()
            );
        }
    }
    Ok(())
}
