//! Picks a baseline's hyperparameter in hindsight (lowest mean RMSE over the
//! seeds) and compares it with the estimator, which needs no tuning.
//!
//! ```text
//! cargo run --release --example baseline_sweep -- [family]
//! ```

use oeuvre::baselines::BaselineFamily;
use oeuvre::harness::{sweep_baseline, ExperimentConfig};
use oeuvre::tasks::TaskSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "sliding_window".into());
    let family = BaselineFamily::parse(&name).ok_or(format!("unknown baseline family `{name}`"))?;

    let cfg = ExperimentConfig::new(TaskSpec::linreg(25, 0.05), 2000, 10);
    let rep = sweep_baseline(&cfg, family, None)?;
    for (i, s) in rep.settings.iter().enumerate() {
        let mark = if i == rep.best_index { "*" } else { " " };
        println!("{mark} {:<20} {:.5}", s.label, s.summary.rmse.mean);
    }
    println!("  {:<20} {:.5}", rep.oeuvre.label, rep.oeuvre.summary.rmse.mean);
    Ok(())
}
