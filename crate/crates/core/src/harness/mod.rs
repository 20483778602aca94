//! Seeded experiment runner.
//!
//! A run streams one task per seed through the estimator and every
//! configured baseline side by side, scores each estimate trace against the
//! task's ground truth, and aggregates the per-seed metrics. Seeds run in
//! parallel; results are merged in seed order so a run is reproducible
//! regardless of thread count.

mod coverage;
mod metrics;
mod sweep;

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use coverage::{
    coverage_study, CheckpointCoverage, CoverageReport, CoverageSettings, NormalizedErrors,
    UniformCoverage,
};
pub use metrics::{Aggregate, AggregateMetrics, Metrics};
pub use sweep::{sweep_baseline, SettingReport, SweepReport};

use crate::baselines::{BaselineEstimator, BaselineFamily, BaselineKind};
use crate::error::{Error, Result};
use crate::estimator::{Oeuvre, OeuvreConfig};
use crate::tasks::{TaskFactory, TaskSpec};

/// Column name of the recursive estimator in traces and reports.
pub const OEUVRE_COLUMN: &str = "oeuvre";

/// One baseline family and the hyperparameters to run it with; the family's
/// default grid is used when `grid` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineGrid {
    pub family: BaselineFamily,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
}

impl BaselineGrid {
    pub fn default_for(family: BaselineFamily) -> Self {
        Self { family, grid: None }
    }

    pub fn kinds(&self) -> Result<Vec<BaselineKind>> {
        match &self.grid {
            None => Ok(self.family.default_grid()),
            Some(values) if values.is_empty() => Err(Error::Config(format!(
                "baseline grid for {} is empty",
                self.family.name()
            ))),
            Some(_) if self.family == BaselineFamily::Prequential => Ok(vec![BaselineKind::Prequential]),
            Some(values) => values
                .iter()
                .map(|&v| {
                    self.family
                        .with_param(v)
                        .map_err(|e| Error::Config(e.to_string()))
                })
                .collect(),
        }
    }
}

fn all_families() -> Vec<BaselineGrid> {
    BaselineFamily::ALL.iter().copied().map(BaselineGrid::default_for).collect()
}

fn default_true() -> bool {
    true
}

/// A full experiment, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskSpec,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub oeuvre: OeuvreConfig,
    #[serde(default = "all_families")]
    pub baselines: Vec<BaselineGrid>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub write_traces: bool,
    #[serde(default)]
    pub coverage: CoverageSettings,
}

impl ExperimentConfig {
    /// Seeds `0..seeds`, the default estimator and every baseline family.
    pub fn new(task: TaskSpec, horizon: u64, seeds: u64) -> Self {
        Self {
            task,
            horizon,
            seeds: (0..seeds).collect(),
            oeuvre: OeuvreConfig::default(),
            baselines: all_families(),
            out_dir: None,
            write_traces: true,
            coverage: CoverageSettings::default(),
        }
    }

    pub fn with_baselines(mut self, baselines: Vec<BaselineGrid>) -> Self {
        self.baselines = baselines;
        self
    }

    /// Reads and validates a config file. Unreadable files count as
    /// configuration errors.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.oeuvre.adaptive && self.horizon < self.oeuvre.burn_in + 1 {
            return Err(Error::Config(format!(
                "horizon {} must exceed the burn-in of {} steps",
                self.horizon, self.oeuvre.burn_in
            )));
        }
        let seen: HashSet<u64> = self.seeds.iter().copied().collect();
        if seen.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        Oeuvre::from_config(&self.oeuvre, &self.task.default_schedule())
            .map_err(|e| Error::Config(format!("oeuvre: {e}")))?;
        let kinds = self.baseline_kinds()?;
        let mut labels = HashSet::new();
        for k in &kinds {
            if !labels.insert(k.label()) {
                return Err(Error::Config(format!("baseline {} is listed twice", k.label())));
            }
        }
        self.coverage.validate(self.horizon)?;
        Ok(())
    }

    pub fn baseline_kinds(&self) -> Result<Vec<BaselineKind>> {
        let mut out = Vec::new();
        for g in &self.baselines {
            out.extend(g.kinds()?);
        }
        Ok(out)
    }
}

/// Estimates of every column over one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedTrace {
    pub seed: u64,
    pub truth: Vec<f64>,
    pub oeuvre: Vec<f64>,
    /// One column per baseline, in roster order.
    pub baselines: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedDiagnostics {
    pub seed: u64,
    pub b_hat: f64,
    pub c_hat: f64,
    pub resets: u64,
    pub max_consecutive_resets: u64,
    pub degenerate_scale: bool,
    pub skipped_rate_divisions: u64,
    pub gamma_min: Option<f64>,
    pub gamma_mean: Option<f64>,
    pub gamma_max: Option<f64>,
    pub final_var_bound: f64,
}

/// A seed abandoned because an estimator or the task produced an unusable
/// value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub step: u64,
    pub source: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub name: String,
    pub family: String,
    pub param: Option<f64>,
    #[serde(flatten)]
    pub summary: AggregateMetrics,
    pub per_seed: Vec<Metrics>,
}

/// Everything written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: TaskSpec,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    /// How the ground truth is normalized, when the task rescales it.
    pub truth_scale: Option<String>,
    pub estimators: Vec<EstimatorReport>,
    pub diagnostics: Vec<SeedDiagnostics>,
    pub failures: Vec<SeedFailure>,
}

impl MetricsReport {
    pub fn estimator(&self, name: &str) -> Option<&EstimatorReport> {
        self.estimators.iter().find(|e| e.name == name)
    }

    pub fn oeuvre(&self) -> Option<&EstimatorReport> {
        self.estimator(OEUVRE_COLUMN)
    }

    pub fn baselines(&self) -> impl Iterator<Item = &EstimatorReport> {
        self.estimators.iter().filter(|e| e.name != OEUVRE_COLUMN)
    }

    /// Baseline setting with the lowest mean RMSE; the earliest wins ties.
    pub fn best_baseline(&self) -> Option<&EstimatorReport> {
        let mut best: Option<&EstimatorReport> = None;
        for e in self.baselines() {
            if best.is_none_or(|b| e.summary.rmse.mean < b.summary.rmse.mean) {
                best = Some(e);
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: MetricsReport,
    /// Column names after `t` and `truth`.
    pub columns: Vec<String>,
    /// Traces of the seeds that completed, in seed order.
    pub traces: Vec<SeedTrace>,
}

enum SeedOutcome {
    Done(SeedTrace, SeedDiagnostics),
    Failed(SeedFailure),
}

fn run_seed(
    factory: &TaskFactory,
    config: &ExperimentConfig,
    kinds: &[BaselineKind],
    seed: u64,
) -> Result<SeedOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut task = factory.build(&mut rng)?;
    let mut est = Oeuvre::from_config(&config.oeuvre, &config.task.default_schedule())?;
    let mut baselines = kinds
        .iter()
        .map(|k| BaselineEstimator::new(*k))
        .collect::<Result<Vec<_>>>()?;

    let horizon = config.horizon as usize;
    let mut trace = SeedTrace {
        seed,
        truth: Vec::with_capacity(horizon),
        oeuvre: Vec::with_capacity(horizon),
        baselines: vec![Vec::with_capacity(horizon); kinds.len()],
    };
    let fail = |step: u64, source: &str, message: String| {
        Ok(SeedOutcome::Failed(SeedFailure {
            seed,
            step,
            source: source.to_string(),
            message,
        }))
    };

    for t in 1..=config.horizon {
        let step = match task.step(&mut rng) {
            Ok(s) if s.truth.is_finite() => s,
            Ok(s) => return fail(t, "truth", format!("non-finite ground truth {}", s.truth)),
            Err(e) => return fail(t, "task", e.to_string()),
        };
        match est.observe(&step.obs) {
            Ok(v) if v.is_finite() => trace.oeuvre.push(v),
            Ok(v) => return fail(t, OEUVRE_COLUMN, format!("non-finite estimate {v}")),
            Err(e) => return fail(t, OEUVRE_COLUMN, e.to_string()),
        }
        for (b, column) in baselines.iter_mut().zip(&mut trace.baselines) {
            match b.update(step.obs.loss_curr) {
                Ok(v) if v.is_finite() => column.push(v),
                Ok(v) => return fail(t, &b.kind().label(), format!("non-finite estimate {v}")),
                Err(e) => return fail(t, &b.kind().label(), e.to_string()),
            }
        }
        trace.truth.push(step.truth);
    }

    let st = est.state();
    let d = st.diagnostics();
    let gamma_seen = d.gamma_count > 0;
    let diagnostics = SeedDiagnostics {
        seed,
        b_hat: st.b_hat(),
        c_hat: st.c_hat(),
        resets: d.resets,
        max_consecutive_resets: d.max_consecutive_resets,
        degenerate_scale: d.degenerate_scale,
        skipped_rate_divisions: d.skipped_rate_divisions,
        gamma_min: gamma_seen.then_some(d.gamma_min),
        gamma_mean: d.gamma_mean(),
        gamma_max: gamma_seen.then_some(d.gamma_max),
        final_var_bound: st.var_bound(),
    };
    Ok(SeedOutcome::Done(trace, diagnostics))
}

fn estimator_report(name: String, family: &str, param: Option<f64>, per_seed: Vec<Metrics>) -> EstimatorReport {
    EstimatorReport {
        name,
        family: family.to_string(),
        param,
        summary: AggregateMetrics::of(&per_seed),
        per_seed,
    }
}

/// Runs every seed of `config` and scores each estimator.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let factory = TaskFactory::new(&config.task)?;
    let kinds = config.baseline_kinds()?;

    let outcomes = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(&factory, config, &kinds, seed))
        .collect::<Result<Vec<_>>>()?;

    let mut traces = Vec::new();
    let mut diagnostics = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            SeedOutcome::Done(trace, diag) => {
                traces.push(trace);
                diagnostics.push(diag);
            }
            SeedOutcome::Failed(f) => {
                log::warn!("seed {} failed at step {} ({}): {}", f.seed, f.step, f.source, f.message);
                failures.push(f);
            }
        }
    }

    let mut estimators = Vec::with_capacity(kinds.len() + 1);
    if !traces.is_empty() {
        let per_seed = traces
            .iter()
            .map(|tr| Metrics::compute(&tr.oeuvre, &tr.truth))
            .collect::<Result<Vec<_>>>()?;
        estimators.push(estimator_report(OEUVRE_COLUMN.into(), OEUVRE_COLUMN, None, per_seed));
        for (i, k) in kinds.iter().enumerate() {
            let per_seed = traces
                .iter()
                .map(|tr| Metrics::compute(&tr.baselines[i], &tr.truth))
                .collect::<Result<Vec<_>>>()?;
            estimators.push(estimator_report(k.label(), k.family().name(), k.param(), per_seed));
        }
    }

    let truth_scale = matches!(config.task, TaskSpec::Linreg { .. }).then(|| "divided_by_dim".to_string());
    let mut columns = vec![OEUVRE_COLUMN.to_string()];
    columns.extend(kinds.iter().map(BaselineKind::label));

    Ok(ExperimentOutput {
        report: MetricsReport {
            task: config.task.clone(),
            horizon: config.horizon,
            seeds: config.seeds.clone(),
            truth_scale,
            estimators,
            diagnostics,
            failures,
        },
        columns,
        traces,
    })
}

pub fn trace_file_name(seed: u64) -> String {
    format!("trace_seed{seed}.csv")
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Writes `summary.json` and, when enabled, one trace CSV per completed seed.
/// Returns the paths written.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path, traces: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if traces {
        for trace in &output.traces {
            let path = dir.join(trace_file_name(trace.seed));
            write_trace(trace, &output.columns, &path)?;
            written.push(path);
        }
    }
    let path = dir.join(SUMMARY_FILE);
    write_json(&output.report, &path)?;
    written.push(path);
    Ok(written)
}

fn write_trace(trace: &SeedTrace, columns: &[String], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header = vec!["t".to_string(), "truth".to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..trace.truth.len() {
        row.clear();
        row.push((i + 1).to_string());
        row.push(trace.truth[i].to_string());
        row.push(trace.oeuvre[i].to_string());
        row.extend(trace.baselines.iter().map(|c| c[i].to_string()));
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(task: TaskSpec) -> ExperimentConfig {
        ExperimentConfig::new(task, 200, 3)
    }

    #[test]
    fn config_json_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"task":{"kind":"static"},"horizon":100,"seeds":[1,2]}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.baselines.len(), 5);
        assert!(cfg.write_traces);
        assert_eq!(cfg.baseline_kinds().unwrap().len(), 8 + 5 + 7 + 18 + 1);
    }

    #[test]
    fn config_validation() {
        let mut cfg = small(TaskSpec::static_beta(2.0, 2.0));
        cfg.horizon = 30;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.horizon = 31;
        cfg.validate().unwrap();
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = small(TaskSpec::static_beta(2.0, 2.0));
        cfg.baselines = vec![BaselineGrid {
            family: BaselineFamily::Ema,
            grid: Some(vec![]),
        }];
        assert!(cfg.validate().is_err());
        cfg.baselines[0].grid = Some(vec![0.1, 0.1]);
        assert!(cfg.validate().is_err());
        cfg.baselines[0].grid = Some(vec![1.5]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn static_run_has_small_error() {
        let out = run_experiment(&small(TaskSpec::static_beta(2.0, 5.0))).unwrap();
        let r = out.report.oeuvre().unwrap();
        assert_eq!(r.per_seed.len(), 3);
        assert!(r.summary.rmse.mean < 0.1);
        for e in &out.report.estimators {
            for m in &e.per_seed {
                assert!(m.bias.abs() <= m.mae + 1e-15 && m.mae <= m.rmse + 1e-15);
            }
        }
        assert_eq!(out.columns.len(), out.report.estimators.len());
    }

    #[test]
    fn best_baseline_prefers_earliest_tie() {
        let out = run_experiment(&small(TaskSpec::static_beta(2.0, 5.0)).with_baselines(vec![BaselineGrid {
            family: BaselineFamily::Prequential,
            grid: None,
        }]))
        .unwrap();
        let mut report = out.report;
        let mut dup = report.estimators[1].clone();
        dup.name = "copy".into();
        report.estimators.push(dup);
        assert_eq!(report.best_baseline().unwrap().name, "prequential");
    }

    #[test]
    fn outputs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(TaskSpec::hedge(5, crate::tasks::HedgeLosses::Bernoulli));
        let out = run_experiment(&cfg).unwrap();
        let files = write_outputs(&out, dir.path(), true).unwrap();
        assert_eq!(files.len(), 4);
        let text = fs::read_to_string(dir.path().join(trace_file_name(0))).unwrap();
        assert_eq!(text.lines().count(), 201);
        assert!(text.starts_with("t,truth,oeuvre,sw_10,"));
        let back: MetricsReport =
            serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
        assert_eq!(back.horizon, 200);
    }
}
