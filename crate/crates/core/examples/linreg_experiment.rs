//! Seeded comparison on online linear regression: OGD with a decaying step
//! size, estimator against every default baseline.
//!
//! ```text
//! cargo run --release --example linreg_experiment -- [dim] [seeds]
//! ```

use oeuvre::harness::{run_experiment, ExperimentConfig};
use oeuvre::tasks::TaskSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dim: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(10);
    let seeds: u64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(20);

    let cfg = ExperimentConfig::new(TaskSpec::linreg(dim, 0.05), 2000, seeds);
    let out = run_experiment(&cfg)?;
    let report = &out.report;

    let mut rows: Vec<_> = report.estimators.iter().collect();
    rows.sort_by(|a, b| a.summary.rmse.mean.total_cmp(&b.summary.rmse.mean));
    println!("linreg d={dim}, T={}, {} seeds", cfg.horizon, report.seeds.len());
    for r in rows.iter().take(10) {
        println!(
            "{:<22} rmse {:.5} ± {:.5}   bias {:+.5}",
            r.name, r.summary.rmse.mean, r.summary.rmse.std, r.summary.bias.mean
        );
    }
    if let (Some(o), Some(b)) = (report.oeuvre(), report.best_baseline()) {
        println!("ratio to best baseline ({}): {:.3}", b.name, o.summary.rmse.mean / b.summary.rmse.mean);
    }
    Ok(())
}
