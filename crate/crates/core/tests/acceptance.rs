//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line before asserting.
//!
//! Run with `cargo test -p oeuvre --test acceptance -- --nocapture` to see
//! the report lines.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use oeuvre::baselines::{BaselineEstimator, BaselineKind};
use oeuvre::estimator::{
    gamma_optimal, misspecification_factor, variance_step, LossObservation, Oeuvre, OeuvreConfig,
    WeightPolicy,
};
use oeuvre::harness::{coverage_study, run_experiment, CoverageSettings, ExperimentConfig};
use oeuvre::stability::StabilitySchedule;
use oeuvre::tasks::{HedgeLosses, StaticTask, Task, TaskFactory, TaskSpec};

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!(
        "acceptance {id:>2} [{name}]: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Mean, variance (n - 1) and fourth central moment.
fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (m, var, m4)
}

#[test]
fn criterion_01_running_mean_equality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut task = StaticTask::new(2.0, 5.0, 1).unwrap();
    let mut est = Oeuvre::fixed(StabilitySchedule::zero(), 1.0).unwrap();
    let (mut sum, mut worst) = (0.0, 0.0f64);
    for t in 1..=1000u32 {
        let step = task.step(&mut rng).unwrap();
        sum += step.obs.loss_curr;
        let e = est.observe(&step.obs).unwrap();
        worst = worst.max((e - sum / f64::from(t)).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "running-mean equality",
        worst <= 1e-10 && elapsed < Duration::from_secs(1),
        format!("max |L_t - mean_t| = {worst:.2e}, {:.3}s", secs(elapsed)),
    );
}

#[test]
fn criterion_02_optimal_variance_closed_form() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for _ in 0..1_000_000 {
        let b: f64 = rng.random_range(1e-3..3.0);
        let sigma: f64 = rng.random_range(0.0..1.5 * b);
        let v: f64 = 10f64.powf(rng.random_range(-6.0..1.0)) * b * b;
        let gamma = gamma_optimal(v, sigma, b).unwrap();
        let got = variance_step(v, gamma, sigma, b).unwrap();
        // three-case closed form, written out independently
        let want = if sigma >= b {
            b * b
        } else if v <= sigma * (b - sigma) {
            sigma * sigma + v
        } else {
            b * b * v / (v + (b - sigma).powi(2))
        };
        worst = worst.max(((got - want) / want).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        2,
        "optimal variance closed form",
        worst <= 1e-12 && elapsed < Duration::from_secs(10),
        format!("max relative error {worst:.2e} over 1e6 triples, {:.2}s", secs(elapsed)),
    );
}

const CHECKPOINTS: [usize; 3] = [100, 500, 2000];

/// Errors `L_t - truth_t` and variance bounds at the checkpoints for each
/// replication of the d = 10 regression task.
type Replications = (Vec<[f64; 3]>, Vec<[f64; 3]>, Duration);

fn linreg_replications() -> &'static Replications {
    use std::sync::OnceLock;
    static CELL: OnceLock<Replications> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let spec = TaskSpec::linreg(10, 0.05);
        let factory = TaskFactory::new(&spec).unwrap();
        let schedule = spec.default_schedule();
        let runs: Vec<([f64; 3], [f64; 3])> = (0..2000u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(10_000 + r);
                let mut task: Task = factory.build(&mut rng).unwrap();
                let mut est = Oeuvre::from_config(&OeuvreConfig::default(), &schedule).unwrap();
                let (mut errs, mut vars) = ([0.0; 3], [0.0; 3]);
                for t in 1..=2000usize {
                    let step = task.step(&mut rng).unwrap();
                    let e = est.observe(&step.obs).unwrap();
                    if let Some(i) = CHECKPOINTS.iter().position(|&c| c == t) {
                        errs[i] = e - step.truth;
                        vars[i] = est.state().var_bound();
                    }
                }
                (errs, vars)
            })
            .collect();
        let (errs, vars) = runs.into_iter().unzip();
        (errs, vars, start.elapsed())
    })
}

#[test]
fn criterion_03_unbiasedness() {
    let (errs, _, elapsed) = linreg_replications();
    let mut pass = *elapsed < Duration::from_secs(300);
    let mut detail = Vec::new();
    for (i, t) in CHECKPOINTS.iter().enumerate() {
        let xs: Vec<f64> = errs.iter().map(|e| e[i]).collect();
        let (m, var, _) = moments(&xs);
        let se = (var / xs.len() as f64).sqrt();
        let z = m / se;
        pass &= z.abs() <= 4.0;
        detail.push(format!("t={t}: mean {m:.2e}, z={z:.2}"));
    }
    detail.push(format!("{:.1}s", secs(*elapsed)));
    verdict(3, "unbiasedness", pass, detail.join("; "));
}

#[test]
fn criterion_04_variance_domination() {
    let (errs, vars, _) = linreg_replications();
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, t) in CHECKPOINTS.iter().enumerate() {
        let xs: Vec<f64> = errs.iter().map(|e| e[i]).collect();
        let n = xs.len() as f64;
        let (_, var, m4) = moments(&xs);
        let se = ((m4 - var * var).max(0.0) / n).sqrt();
        let bound = vars.iter().map(|v| v[i]).sum::<f64>() / n;
        pass &= var <= bound + 3.0 * se;
        detail.push(format!("t={t}: var {var:.3e} vs V {bound:.3e} (se {se:.1e})"));
    }
    verdict(4, "variance domination", pass, detail.join("; "));
}

#[test]
fn criterion_05_rate_bound() {
    let start = Instant::now();
    let policy = WeightPolicy::rate_constrained();
    let mut pass = true;
    let mut detail = Vec::new();
    for (b, c) in [(1.0, 0.5), (0.5, 1.0), (2.0, 0.1), (1.0, 3.0)] {
        let schedule = StabilitySchedule::inverse_sqrt_t(c).unwrap();
        let mut est = Oeuvre::fixed(schedule, b).unwrap().with_policy(policy);
        let obs = LossObservation::unchanged(0.5).unwrap();
        est.observe(&obs).unwrap();
        let mut worst = 0.0f64;
        for _ in 2..=100_000u64 {
            est.observe(&obs).unwrap();
            let st = est.state();
            worst = worst.max(st.var_bound() / st.diagnostics().last_gamma);
        }
        let limit = 10.0 * (b + c) * (b + c);
        pass &= worst <= limit;
        detail.push(format!("b={b}, c={c}: max V/gamma {worst:.3} <= {limit:.3}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(5);
    detail.push(format!("{:.2}s", secs(elapsed)));
    verdict(5, "rate bound", pass, detail.join("; "));
}

#[test]
fn criterion_06_misspecification_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for _ in 0..100 {
        let c: f64 = rng.random_range(0.05..3.0);
        let c_hat: f64 = rng.random_range(0.05..3.0);
        let b: f64 = rng.random_range(0.05..3.0);
        let b_hat: f64 = rng.random_range(0.05..3.0);
        let factor = misspecification_factor(c, c_hat, b, b_hat).unwrap();
        // weights come from the misspecified recursion, as in practice
        let (mut v_true, mut v_hat) = (b * b, b_hat * b_hat);
        for t in 1..=10_000u64 {
            if t > 1 {
                let r = 1.0 / (t as f64).sqrt();
                let gamma = gamma_optimal(v_hat, c_hat * r, b_hat).unwrap();
                v_true = variance_step(v_true, gamma, c * r, b).unwrap();
                v_hat = variance_step(v_hat, gamma, c_hat * r, b_hat).unwrap();
            }
            let ratio = v_true / (factor * v_hat);
            worst_ratio = worst_ratio.max(ratio);
            // relative slack of 1e-12 absorbs rounding where the two sides coincide
            if ratio > 1.0 + 1e-12 {
                violations += 1;
            }
        }
    }
    verdict(
        6,
        "misspecification bound",
        violations == 0,
        format!("{violations} violations over 1e6 steps, max V/(factor V_hat) = {worst_ratio:.12}"),
    );
}

#[test]
fn criterion_07_ci_coverage() {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(TaskSpec::static_beta(2.0, 5.0), 1000, 1);
    cfg.baselines.clear();
    cfg.coverage = CoverageSettings {
        delta: 0.05,
        replications: 1000,
        checkpoints: Some(vec![1000]),
        c: Some(3.0),
    };
    let report = coverage_study(&cfg).unwrap();
    let fixed = report.fixed_time[0].coverage;
    let uniform = report.time_uniform.coverage;
    let nominal = 1.0 - 2.0 * (-3.0f64).exp();
    let elapsed = start.elapsed();
    verdict(
        7,
        "confidence coverage",
        report.completed == 1000 && fixed >= 0.95 && uniform >= nominal && elapsed < Duration::from_secs(300),
        format!(
            "fixed-time {fixed:.3} >= 0.95, time-uniform {uniform:.3} >= {nominal:.3}, {:.2}s",
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_08_batched_variance() {
    let final_errors = |batch: u32, offset: u64| -> Vec<f64> {
        (0..2000u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(offset + r);
                let mut task = StaticTask::new(2.0, 5.0, batch).unwrap();
                let mut est = Oeuvre::adaptive(StabilitySchedule::zero(), 30, 1e-8).unwrap();
                let mut last = 0.0;
                for _ in 0..100 {
                    let step = task.step(&mut rng).unwrap();
                    last = est.observe(&step.obs).unwrap() - step.truth;
                }
                last
            })
            .collect()
    };
    let (_, v1, _) = moments(&final_errors(1, 200_000));
    let (_, v4, _) = moments(&final_errors(4, 300_000));
    let ratio = v4 / v1;
    verdict(
        8,
        "batched variance",
        (0.2..=0.3).contains(&ratio),
        format!("Var(B=4) / Var(B=1) = {ratio:.4}"),
    );
}

fn reproduction(spec: TaskSpec) -> (f64, f64, String, Duration) {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(spec, 10_000, 10);
    cfg.write_traces = false;
    let out = run_experiment(&cfg).unwrap();
    assert!(out.report.failures.is_empty(), "{:?}", out.report.failures);
    let oeuvre = out.report.oeuvre().unwrap().summary.rmse.mean;
    let best = out.report.best_baseline().unwrap();
    (oeuvre, best.summary.rmse.mean, best.name.clone(), start.elapsed())
}

#[test]
fn criterion_09_linreg_reproduction() {
    let (oeuvre, best, name, elapsed) = reproduction(TaskSpec::linreg(25, 0.05));
    verdict(
        9,
        "linear regression vs best baseline",
        oeuvre <= 1.5 * best && elapsed < Duration::from_secs(600),
        format!(
            "oeuvre RMSE {oeuvre:.4e}, best baseline {name} {best:.4e}, ratio {:.3}, {:.1}s",
            oeuvre / best,
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_10_hedge_reproduction() {
    let (oeuvre, best, name, elapsed) = reproduction(TaskSpec::hedge(100, HedgeLosses::Beta));
    verdict(
        10,
        "hedge vs best baseline",
        oeuvre < best,
        format!(
            "oeuvre RMSE {oeuvre:.4e}, best baseline {name} {best:.4e}, ratio {:.3}, {:.1}s",
            oeuvre / best,
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_11_baseline_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let stream: Vec<f64> = (0..10_000).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut worst = 0.0f64;
    for window in [1usize, 10, 100, 1000, 20_000] {
        let mut sw = BaselineEstimator::new(BaselineKind::SlidingWindow { window }).unwrap();
        for (i, &x) in stream.iter().enumerate() {
            let got = sw.update(x).unwrap();
            let lo = (i + 1).saturating_sub(window);
            let slice = &stream[lo..=i];
            let want = slice.iter().sum::<f64>() / slice.len() as f64;
            worst = worst.max((got - want).abs());
        }
    }
    let mut preq = BaselineEstimator::new(BaselineKind::Prequential).unwrap();
    for (i, &x) in stream.iter().enumerate() {
        let got = preq.update(x).unwrap();
        let want = stream[..=i].iter().sum::<f64>() / (i + 1) as f64;
        worst = worst.max((got - want).abs());
    }
    verdict(
        11,
        "baseline oracle equivalence",
        worst <= 1e-12,
        format!("max deviation from brute force {worst:.2e}"),
    );
}
