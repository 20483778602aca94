//! Competing prequential estimators.
//!
//! Every baseline consumes only the prequential value `loss_curr` (the
//! current model's loss on the incoming sample) and produces a running
//! estimate of the current expected loss.

mod adwin;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use adwin::{adwin_cut_test, Adwin, Bucket, MAX_BUCKETS_PER_LEVEL};

use crate::error::{check_non_negative, Error, Result};

/// Default sweep grids.
pub mod grids {
    pub const SLIDING_WINDOW: &[usize] = &[10, 50, 100, 200, 400, 600, 800, 1000];
    pub const EMA: &[f64] = &[0.1, 0.05, 0.01, 0.005, 0.001];
    pub const FFPREQ: &[f64] = &[0.8, 0.9, 0.95, 0.99, 0.999, 0.9999, 0.99999];
    pub const ADWIN: &[f64] = &[
        1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 5e-2, 5e-3, 5e-4, 5e-5, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7,
        0.8, 0.9,
    ];
}

/// A baseline family together with its single hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineKind {
    SlidingWindow { window: usize },
    Ema { decay: f64 },
    Ffpreq { fading: f64 },
    Adwin { delta: f64 },
    Prequential,
}

/// Baseline family without its hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineFamily {
    SlidingWindow,
    Ema,
    Ffpreq,
    Adwin,
    Prequential,
}

impl BaselineFamily {
    pub const ALL: [BaselineFamily; 5] = [
        BaselineFamily::SlidingWindow,
        BaselineFamily::Ema,
        BaselineFamily::Ffpreq,
        BaselineFamily::Adwin,
        BaselineFamily::Prequential,
    ];

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "sliding_window" | "sw" => Some(Self::SlidingWindow),
            "ema" => Some(Self::Ema),
            "ffpreq" => Some(Self::Ffpreq),
            "adwin" => Some(Self::Adwin),
            "prequential" => Some(Self::Prequential),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SlidingWindow => "sliding_window",
            Self::Ema => "ema",
            Self::Ffpreq => "ffpreq",
            Self::Adwin => "adwin",
            Self::Prequential => "prequential",
        }
    }

    /// The family's default grid, as full baseline kinds.
    pub fn default_grid(&self) -> Vec<BaselineKind> {
        match self {
            Self::SlidingWindow => grids::SLIDING_WINDOW
                .iter()
                .map(|&window| BaselineKind::SlidingWindow { window })
                .collect(),
            Self::Ema => grids::EMA
                .iter()
                .map(|&decay| BaselineKind::Ema { decay })
                .collect(),
            Self::Ffpreq => grids::FFPREQ
                .iter()
                .map(|&fading| BaselineKind::Ffpreq { fading })
                .collect(),
            Self::Adwin => grids::ADWIN
                .iter()
                .map(|&delta| BaselineKind::Adwin { delta })
                .collect(),
            Self::Prequential => vec![BaselineKind::Prequential],
        }
    }

    /// Builds a kind of this family from a numeric hyperparameter.
    pub fn with_param(&self, value: f64) -> Result<BaselineKind> {
        let kind = match self {
            Self::SlidingWindow => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::invalid(format!("window size must be a positive integer, got {value}")));
                }
                BaselineKind::SlidingWindow {
                    window: value as usize,
                }
            }
            Self::Ema => BaselineKind::Ema { decay: value },
            Self::Ffpreq => BaselineKind::Ffpreq { fading: value },
            Self::Adwin => BaselineKind::Adwin { delta: value },
            Self::Prequential => BaselineKind::Prequential,
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl BaselineKind {
    pub fn family(&self) -> BaselineFamily {
        match self {
            Self::SlidingWindow { .. } => BaselineFamily::SlidingWindow,
            Self::Ema { .. } => BaselineFamily::Ema,
            Self::Ffpreq { .. } => BaselineFamily::Ffpreq,
            Self::Adwin { .. } => BaselineFamily::Adwin,
            Self::Prequential => BaselineFamily::Prequential,
        }
    }

    pub fn param(&self) -> Option<f64> {
        match *self {
            Self::SlidingWindow { window } => Some(window as f64),
            Self::Ema { decay } => Some(decay),
            Self::Ffpreq { fading } => Some(fading),
            Self::Adwin { delta } => Some(delta),
            Self::Prequential => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::SlidingWindow { window: 0 } => {
                Err(Error::invalid("window size must be >= 1"))
            }
            Self::Ema { decay } if !(decay > 0.0 && decay <= 1.0) => {
                Err(Error::invalid(format!("EMA decay must lie in (0, 1], got {decay}")))
            }
            Self::Ffpreq { fading } if !(fading > 0.0 && fading <= 1.0) => Err(Error::invalid(
                format!("fading factor must lie in (0, 1], got {fading}"),
            )),
            Self::Adwin { delta } if !(delta > 0.0 && delta < 1.0) => {
                Err(Error::invalid(format!("ADWIN delta must lie in (0, 1), got {delta}")))
            }
            _ => Ok(()),
        }
    }

    /// Column label, e.g. `sw_100` or `adwin_0.001`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SlidingWindow { window } => write!(f, "sw_{window}"),
            Self::Ema { decay } => write!(f, "ema_{decay}"),
            Self::Ffpreq { fading } => write!(f, "ffpreq_{fading}"),
            Self::Adwin { delta } => write!(f, "adwin_{delta}"),
            Self::Prequential => write!(f, "prequential"),
        }
    }
}

#[derive(Debug, Clone)]
enum Inner {
    SlidingWindow {
        window: usize,
        values: VecDeque<f64>,
        sum: f64,
        since_resum: usize,
    },
    Ema {
        decay: f64,
        value: Option<f64>,
    },
    Ffpreq {
        fading: f64,
        weighted_sum: f64,
        weighted_count: f64,
    },
    Adwin(Adwin),
    Prequential {
        sum: f64,
        count: u64,
    },
}

/// A streaming baseline estimator. Single-threaded per instance.
#[derive(Debug, Clone)]
pub struct BaselineEstimator {
    kind: BaselineKind,
    inner: Inner,
    estimate: Option<f64>,
}

impl BaselineEstimator {
    pub fn new(kind: BaselineKind) -> Result<Self> {
        kind.validate()?;
        let inner = match kind {
            BaselineKind::SlidingWindow { window } => Inner::SlidingWindow {
                window,
                values: VecDeque::with_capacity(window),
                sum: 0.0,
                since_resum: 0,
            },
            BaselineKind::Ema { decay } => Inner::Ema { decay, value: None },
            BaselineKind::Ffpreq { fading } => Inner::Ffpreq {
                fading,
                weighted_sum: 0.0,
                weighted_count: 0.0,
            },
            BaselineKind::Adwin { delta } => Inner::Adwin(Adwin::new(delta)?),
            BaselineKind::Prequential => Inner::Prequential { sum: 0.0, count: 0 },
        };
        Ok(Self {
            kind,
            inner,
            estimate: None,
        })
    }

    pub fn kind(&self) -> &BaselineKind {
        &self.kind
    }

    pub fn estimate(&self) -> Option<f64> {
        self.estimate
    }

    /// Values currently retained by a sliding window (oldest first).
    pub fn retained(&self) -> Option<&VecDeque<f64>> {
        match &self.inner {
            Inner::SlidingWindow { values, .. } => Some(values),
            _ => None,
        }
    }

    pub fn adwin(&self) -> Option<&Adwin> {
        match &self.inner {
            Inner::Adwin(a) => Some(a),
            _ => None,
        }
    }

    pub fn update(&mut self, loss: f64) -> Result<f64> {
        check_non_negative("loss", loss)?;
        let est = match &mut self.inner {
            Inner::SlidingWindow {
                window,
                values,
                sum,
                since_resum,
            } => {
                if values.len() == *window {
                    let old = values.pop_front().expect("full window");
                    *sum -= old;
                }
                values.push_back(loss);
                *sum += loss;
                *since_resum += 1;
                if *since_resum >= *window {
                    *sum = values.iter().sum();
                    *since_resum = 0;
                }
                *sum / values.len() as f64
            }
            Inner::Ema { decay, value } => {
                let next = match *value {
                    None => loss,
                    Some(prev) => (1.0 - *decay) * prev + *decay * loss,
                };
                *value = Some(next);
                next
            }
            Inner::Ffpreq {
                fading,
                weighted_sum,
                weighted_count,
            } => {
                *weighted_sum = loss + *fading * *weighted_sum;
                *weighted_count = 1.0 + *fading * *weighted_count;
                *weighted_sum / *weighted_count
            }
            Inner::Adwin(a) => a.update(loss)?,
            Inner::Prequential { sum, count } => {
                *sum += loss;
                *count += 1;
                *sum / *count as f64
            }
        };
        self.estimate = Some(est);
        Ok(est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(kind: BaselineKind, xs: &[f64]) -> Vec<f64> {
        let mut e = BaselineEstimator::new(kind).unwrap();
        xs.iter().map(|&x| e.update(x).unwrap()).collect()
    }

    #[test]
    fn sliding_window_example() {
        let got = run(BaselineKind::SlidingWindow { window: 2 }, &[1.0, 2.0, 3.0]);
        assert_eq!(got, vec![1.0, 1.5, 2.5]);
    }

    #[test]
    fn ema_example_matches_weighted_sum() {
        let xs = [0.0, 1.0];
        let got = run(BaselineKind::Ema { decay: 0.5 }, &xs);
        assert_eq!(got, vec![0.0, 0.5]);
        // oracle: e_n = (1-l)^(n-1) x_1 + sum_{k>=2} l (1-l)^(n-k) x_k
        let xs = [0.3, 0.9, 0.1, 0.4, 0.8];
        let l = 0.2f64;
        let got = run(BaselineKind::Ema { decay: l }, &xs);
        for n in 1..=xs.len() {
            let mut oracle = (1.0 - l).powi(n as i32 - 1) * xs[0];
            for k in 2..=n {
                oracle += l * (1.0 - l).powi((n - k) as i32) * xs[k - 1];
            }
            assert!((got[n - 1] - oracle).abs() < 1e-14);
        }
    }

    #[test]
    fn ffpreq_on_constant_stream() {
        for &a in grids::FFPREQ {
            let got = run(BaselineKind::Ffpreq { fading: a }, &[0.42; 50]);
            assert!(got.iter().all(|&e| (e - 0.42).abs() < 1e-12));
        }
    }

    #[test]
    fn prequential_running_mean() {
        let got = run(BaselineKind::Prequential, &[1.0, 2.0, 6.0]);
        assert_eq!(got, vec![1.0, 1.5, 3.0]);
    }

    #[test]
    fn constant_stream_converges_for_every_default_setting() {
        for family in BaselineFamily::ALL {
            for kind in family.default_grid() {
                let got = run(kind, &[0.25; 100]);
                assert!((got[99] - 0.25).abs() < 1e-12, "{kind}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut e = BaselineEstimator::new(BaselineKind::Prequential).unwrap();
        assert!(e.update(f64::NAN).is_err());
        assert!(e.update(-1.0).is_err());
        assert!(BaselineEstimator::new(BaselineKind::SlidingWindow { window: 0 }).is_err());
        assert!(BaselineEstimator::new(BaselineKind::Ema { decay: 0.0 }).is_err());
        assert!(BaselineEstimator::new(BaselineKind::Ffpreq { fading: 1.5 }).is_err());
    }

    #[test]
    fn labels_and_grids() {
        assert_eq!(BaselineKind::SlidingWindow { window: 100 }.label(), "sw_100");
        assert_eq!(BaselineKind::Adwin { delta: 1e-5 }.label(), "adwin_0.00001");
        assert_eq!(BaselineKind::Ffpreq { fading: 0.99999 }.label(), "ffpreq_0.99999");
        assert_eq!(BaselineFamily::SlidingWindow.default_grid().len(), 8);
        assert_eq!(BaselineFamily::Adwin.default_grid().len(), 18);
        assert_eq!(BaselineFamily::parse("sw"), Some(BaselineFamily::SlidingWindow));
        assert!(BaselineFamily::Ema.with_param(0.05).is_ok());
        assert!(BaselineFamily::SlidingWindow.with_param(2.5).is_err());
    }

    #[test]
    fn kind_serde() {
        let k: BaselineKind = serde_json::from_str(r#"{"kind":"adwin","delta":0.002}"#).unwrap();
        assert_eq!(k, BaselineKind::Adwin { delta: 0.002 });
    }
}
