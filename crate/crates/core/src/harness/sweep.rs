use serde::{Deserialize, Serialize};

use super::{run_experiment, AggregateMetrics, BaselineGrid, EstimatorReport, ExperimentConfig};
use crate::baselines::BaselineFamily;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingReport {
    pub label: String,
    pub param: Option<f64>,
    #[serde(flatten)]
    pub summary: AggregateMetrics,
}

impl From<&EstimatorReport> for SettingReport {
    fn from(e: &EstimatorReport) -> Self {
        Self {
            label: e.name.clone(),
            param: e.param,
            summary: e.summary,
        }
    }
}

/// Result of picking a baseline hyperparameter in hindsight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub family: BaselineFamily,
    /// Always true: the selection looks at the ground truth, which a
    /// deployed estimator cannot do.
    pub oracle_selection: bool,
    pub settings: Vec<SettingReport>,
    pub best_index: usize,
    pub best: SettingReport,
    pub oeuvre: SettingReport,
    pub failed_seeds: Vec<u64>,
}

/// Runs every setting in `grid` (the config's grid for `family`, else the
/// family default, when `None`) over all seeds and selects the lowest mean
/// RMSE, breaking ties towards the earlier setting.
pub fn sweep_baseline(
    config: &ExperimentConfig,
    family: BaselineFamily,
    grid: Option<Vec<f64>>,
) -> Result<SweepReport> {
    let grid = grid.or_else(|| {
        config
            .baselines
            .iter()
            .find(|g| g.family == family)
            .and_then(|g| g.grid.clone())
    });
    let cfg = config.clone().with_baselines(vec![BaselineGrid { family, grid }]);
    let output = run_experiment(&cfg)?;
    let report = &output.report;

    let settings: Vec<SettingReport> = report.baselines().map(SettingReport::from).collect();
    let oeuvre = report
        .oeuvre()
        .map(SettingReport::from)
        .ok_or_else(|| Error::State("every seed failed; nothing to select from".into()))?;
    let mut best_index = 0;
    for (i, s) in settings.iter().enumerate() {
        if s.summary.rmse.mean < settings[best_index].summary.rmse.mean {
            best_index = i;
        }
    }
    Ok(SweepReport {
        family,
        oracle_selection: true,
        best: settings[best_index].clone(),
        settings,
        best_index,
        oeuvre,
        failed_seeds: report.failures.iter().map(|f| f.seed).collect(),
    })
}
