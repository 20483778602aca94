//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage, configuration or input errors,
//! 3 for filesystem failures. Failures are reported on standard error as a
//! single JSON object; standard output carries only data.

mod stream;

use std::ffi::OsString;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use stream::{stream_estimates, StreamRecord, StreamSummary};

use crate::baselines::BaselineFamily;
use crate::error::{Error, Result};
use crate::estimator::{Oeuvre, DEFAULT_BURN_IN, DEFAULT_B_HAT, DEFAULT_C_HAT, DEFAULT_EPS_FLOOR};
use crate::harness::{coverage_study, run_experiment, sweep_baseline, write_json, write_outputs, ExperimentConfig};
use crate::stability::{RateKind, StabilitySchedule};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "OEUVRE_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "oeuvre-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "oeuvre", version, about = "Streaming estimates of an online learner's current loss")]
pub struct Cli {
    /// Output directory; overrides the config file and $OEUVRE_OUT_DIR.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write per-seed traces plus summary.json.
    Run { config: PathBuf },
    /// Select a baseline hyperparameter by lowest mean RMSE in hindsight.
    Sweep {
        config: PathBuf,
        /// sliding_window (or sw), ema, ffpreq, adwin or prequential.
        estimator: String,
        /// Comma-separated grid overriding the config and the default.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Estimate the current loss of an external stream of evaluations.
    Stream(StreamArgs),
    /// Measure the empirical coverage of the confidence bounds.
    Coverage { config: PathBuf },
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// Stability rate r(t): inverse_t, inverse_sqrt_t or zero.
    #[arg(long, default_value = "inverse_sqrt_t")]
    pub sigma_kind: String,
    /// Stability constant; implies known constants unless --adaptive is given.
    #[arg(long)]
    pub c_hat: Option<f64>,
    /// Loss scale; implies known constants unless --adaptive is given.
    #[arg(long)]
    pub b_hat: Option<f64>,
    /// Estimate the constants during a burn-in [default: true unless
    /// --c-hat or --b-hat is given].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub adaptive: Option<bool>,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: u64,
    #[arg(long, default_value_t = DEFAULT_EPS_FLOOR)]
    pub eps: f64,
    /// Print the fixed-time confidence half-width at this failure probability.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Input CSV (t,loss_curr,loss_prev[,sigma_override]); standard input when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

impl StreamArgs {
    pub fn estimator(&self) -> Result<Oeuvre> {
        let kind = RateKind::parse(&self.sigma_kind).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown --sigma-kind `{}` (expected inverse_t, inverse_sqrt_t or zero)",
                self.sigma_kind
            ))
        })?;
        let adaptive = self
            .adaptive
            .unwrap_or(self.c_hat.is_none() && self.b_hat.is_none());
        let schedule = StabilitySchedule::new(kind, self.c_hat.unwrap_or(DEFAULT_C_HAT))?;
        if adaptive {
            Oeuvre::adaptive(schedule, self.burn_in, self.eps)
        } else {
            Oeuvre::fixed(schedule, self.b_hat.unwrap_or(DEFAULT_B_HAT))
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Json { .. } => EXIT_IO,
        Error::InvalidArgument(_) | Error::State(_) | Error::Config(_) | Error::Csv { .. } => EXIT_USAGE,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::State(_) => "state",
        Error::Config(_) => "config",
        Error::Io { .. } | Error::Csv { .. } | Error::Json { .. } => "io",
    }
}

fn report_error(stderr: &mut dyn Write, err: &Error) -> i32 {
    let line = json!({ "error": error_kind(err), "message": err.to_string() });
    let _ = writeln!(stderr, "{line}");
    exit_code(err)
}

/// Output directory: `--out-dir`, then the config's `out_dir`, then
/// `$OEUVRE_OUT_DIR`, then `oeuvre-out`.
pub fn resolve_out_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    flag.or(config)
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match execute(&cli, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(e) => report_error(stderr, &e),
    }
}

fn print_json(stdout: &mut dyn Write, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: PathBuf::from("<stdout>"),
        source: e,
    })?;
    writeln!(stdout, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn execute(cli: &Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_path(config)?;
            let dir = resolve_out_dir(cli.out_dir.as_deref(), cfg.out_dir.as_deref());
            let output = run_experiment(&cfg)?;
            write_outputs(&output, &dir, cfg.write_traces)?;
            let report = &output.report;
            let line = json!({
                "summary": dir.join(crate::harness::SUMMARY_FILE),
                "oeuvre_rmse": report.oeuvre().map(|e| e.summary.rmse.mean),
                "best_baseline": report.best_baseline().map(|e| &e.name),
                "best_baseline_rmse": report.best_baseline().map(|e| e.summary.rmse.mean),
                "failed_seeds": report.failures.len(),
            });
            writeln!(stdout, "{line}").map_err(|e| Error::io("<stdout>", e))?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            config,
            estimator,
            grid,
        } => {
            let family = BaselineFamily::parse(estimator).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown estimator `{estimator}` (expected sliding_window, ema, ffpreq, adwin or prequential)"
                ))
            })?;
            let cfg = ExperimentConfig::from_path(config)?;
            let report = sweep_baseline(&cfg, family, grid.clone())?;
            print_json(stdout, &report)?;
            Ok(EXIT_OK)
        }
        Command::Coverage { config } => {
            let cfg = ExperimentConfig::from_path(config)?;
            let dir = resolve_out_dir(cli.out_dir.as_deref(), cfg.out_dir.as_deref());
            let report = coverage_study(&cfg)?;
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            write_json(&report, &dir.join("coverage.json"))?;
            let fixed: Vec<_> = report
                .fixed_time
                .iter()
                .map(|c| json!({ "t": c.t, "coverage": c.coverage, "mean_half_width": c.mean_half_width }))
                .collect();
            let line = json!({
                "delta": report.delta,
                "c": report.c,
                "completed": report.completed,
                "fixed_time": fixed,
                "time_uniform": report.time_uniform,
                "normalized_mean": report.normalized.mean,
                "normalized_std": report.normalized.std,
            });
            writeln!(stdout, "{line}").map_err(|e| Error::io("<stdout>", e))?;
            Ok(EXIT_OK)
        }
        Command::Stream(args) => {
            let mut est = args.estimator()?;
            let summary = match &args.input {
                Some(path) => {
                    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
                    stream_estimates(&mut est, &mut BufReader::new(file), stdout, stderr, args.delta)?
                }
                None => stream_estimates(&mut est, stdin, stdout, stderr, args.delta)?,
            };
            if summary.skipped > 0 {
                let err = Error::InvalidArgument(format!(
                    "{} malformed row(s) skipped, {} estimate(s) written",
                    summary.skipped, summary.emitted
                ));
                return Ok(report_error(stderr, &err));
            }
            Ok(EXIT_OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str], input: &str) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(
            std::iter::once("oeuvre").chain(args.iter().copied()),
            &mut input.as_bytes(),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn stream_defaults_to_adaptive() {
        let cli = Cli::try_parse_from(["oeuvre", "stream"]).unwrap();
        let Command::Stream(args) = cli.command else { panic!() };
        assert!(!args.estimator().unwrap().state().is_running());
        let cli = Cli::try_parse_from(["oeuvre", "stream", "--c-hat", "0.5"]).unwrap();
        let Command::Stream(args) = cli.command else { panic!() };
        assert_eq!(args.estimator().unwrap().state().c_hat(), 0.5);
        let cli = Cli::try_parse_from(["oeuvre", "stream", "--c-hat", "0.5", "--adaptive"]).unwrap();
        let Command::Stream(args) = cli.command else { panic!() };
        assert_eq!(args.adaptive, Some(true));
    }

    #[test]
    fn unknown_sigma_kind_is_usage_error() {
        let (code, out, err) = call(&["stream", "--sigma-kind", "cubic"], "");
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "invalid_argument");
    }

    #[test]
    fn bad_subcommand_is_usage_error() {
        assert_eq!(call(&["frobnicate"], "").0, EXIT_USAGE);
        assert_eq!(call(&["--help"], "").0, EXIT_OK);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::io("/x", std::io::Error::other("boom"))),
            EXIT_IO
        );
    }

    #[test]
    fn out_dir_precedence() {
        assert_eq!(resolve_out_dir(Some(Path::new("a")), Some(Path::new("b"))), PathBuf::from("a"));
        assert_eq!(resolve_out_dir(None, Some(Path::new("b"))), PathBuf::from("b"));
    }
}
