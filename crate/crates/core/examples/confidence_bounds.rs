//! Fixed-time intervals and the time-uniform boundary, first on one trace
//! and then as an empirical coverage study over many replications.
//!
//! ```text
//! cargo run --release --example confidence_bounds
//! ```

use oeuvre::estimator::{time_uniform_boundary, Oeuvre};
use oeuvre::harness::{coverage_study, ExperimentConfig};
use oeuvre::stability::StabilitySchedule;
use oeuvre::tasks::{HedgeLosses, HedgeTask, TaskSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> oeuvre::error::Result<()> {
    let delta: f64 = 0.05;
    let c = (2.0 / delta).ln();

    // one trace with a known loss range
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut task = HedgeTask::new(10, HedgeLosses::Beta, &mut rng)?;
    let mut est = Oeuvre::fixed(StabilitySchedule::inverse_sqrt_t(1.0)?, 1.0)?;
    let mut history = Vec::new();
    let mut errors = Vec::new();
    for _ in 0..1000 {
        let step = task.step(&mut rng)?;
        let e = est.observe(&step.obs)?;
        let st = est.state();
        if st.steps_since_reset() == 1 {
            history.clear();
            errors.clear();
        }
        history.push((st.var_bound(), st.gamma_prod()));
        errors.push(e - step.truth);
    }
    let h = time_uniform_boundary(&history, history.len(), c)?;
    let inside = errors.iter().zip(&h).filter(|(m, b)| m.abs() <= **b).count();
    println!("time-uniform: {inside}/{} steps inside the boundary", h.len());
    println!("final fixed-time half-width {:.4}", est.fixed_time_ci(delta)?.half_width);

    // coverage over independent replications
    let mut cfg = ExperimentConfig::new(TaskSpec::hedge(10, HedgeLosses::Beta), 1000, 1);
    cfg.coverage.delta = delta;
    cfg.coverage.replications = 500;
    let rep = coverage_study(&cfg)?;
    for cp in &rep.fixed_time {
        println!("t={:<5} coverage {:.3}  mean half-width {:.4}", cp.t, cp.coverage, cp.mean_half_width);
    }
    println!(
        "uniform coverage {:.3} (nominal {:.3}), normalized error std {:.3}",
        rep.time_uniform.coverage, rep.time_uniform.nominal, rep.normalized.std
    );
    Ok(())
}
