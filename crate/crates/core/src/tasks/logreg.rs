use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Bernoulli, Distribution};

use super::prequential::{Learner, Prequential};
use super::sampling::{sample_unit_sphere, Covariance};
use super::Step;
use crate::error::{check_positive, Error, Result};

pub const DEFAULT_LOGREG_ETA0: f64 = 0.05;

/// Feature rows with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::invalid("dataset needs matching, non-empty features and labels"));
        }
        let dim = features[0].len();
        for (i, (x, &y)) in features.iter().zip(&labels).enumerate() {
            if x.len() != dim {
                return Err(Error::invalid(format!(
                    "row {i} has {} features, expected {dim}",
                    x.len()
                )));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} has non-finite features")));
            }
            if y != 0.0 && y != 1.0 {
                return Err(Error::invalid(format!("row {i} label {y} is not 0 or 1")));
            }
        }
        Ok(Self { features, labels })
    }

    /// Header row, feature columns, then a final 0/1 label column.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::csv(path, e))?;
            let values = record
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Config(format!("{}: row {}: {e}", path.display(), i + 1)))?;
            let Some((&y, x)) = values.split_last() else {
                continue;
            };
            if x.is_empty() {
                return Err(Error::Config(format!(
                    "{}: row {} needs at least one feature column",
                    path.display(),
                    i + 1
                )));
            }
            features.push(x.to_vec());
            labels.push(y);
        }
        Self::new(features, labels).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Gaussian features labelled by a logistic model with a random unit
    /// direction scaled by `margin`.
    pub fn synthetic<R: Rng + ?Sized>(rows: usize, dim: usize, margin: f64, rng: &mut R) -> Result<Self> {
        if rows == 0 {
            return Err(Error::invalid("synthetic dataset needs at least one row"));
        }
        let direction = sample_unit_sphere(dim, rng)?;
        let cov = Covariance::identity(dim)?;
        let mut features = Vec::with_capacity(rows);
        let mut labels = Vec::with_capacity(rows);
        for _ in 0..rows {
            let x = cov.sample(rng);
            let p = sigmoid(margin * dot(&direction, &x));
            let y = Bernoulli::new(p).map_err(|e| Error::invalid(e.to_string()))?.sample(rng);
            features.push(x);
            labels.push(f64::from(u8::from(y)));
        }
        Self::new(features, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn row(&self, i: usize) -> (&[f64], f64) {
        (&self.features[i], self.labels[i])
    }
}

/// Cross-entropy of the logit `z` against label `y`, without overflow.
pub fn cross_entropy(z: f64, y: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Logistic regression trained by online gradient descent with
/// `eta_t = eta0 / sqrt(t)`; predictions use the running average of the
/// iterates.
#[derive(Debug, Clone)]
pub struct PolyakLogistic {
    w: Vec<f64>,
    w_bar: Vec<f64>,
    bias: f64,
    bias_bar: f64,
    fit_intercept: bool,
    eta0: f64,
    updates: u64,
}

impl PolyakLogistic {
    pub fn new(dim: usize, eta0: f64, fit_intercept: bool) -> Self {
        Self {
            w: vec![0.0; dim],
            w_bar: vec![0.0; dim],
            bias: 0.0,
            bias_bar: 0.0,
            fit_intercept,
            eta0,
            updates: 0,
        }
    }

    pub fn iterate(&self) -> (&[f64], f64) {
        (&self.w, self.bias)
    }

    pub fn average(&self) -> (&[f64], f64) {
        (&self.w_bar, self.bias_bar)
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn averaged_loss(&self, x: &[f64], y: f64) -> f64 {
        cross_entropy(dot(&self.w_bar, x) + self.bias_bar, y)
    }
}

impl Learner for PolyakLogistic {
    type Sample = (Vec<f64>, f64);

    fn loss(&self, (x, y): &Self::Sample) -> f64 {
        self.averaged_loss(x, *y)
    }

    fn update(&mut self, (x, y): &Self::Sample, t: u64) {
        let eta = self.eta0 / (t as f64).sqrt();
        let g = sigmoid(dot(&self.w, x) + self.bias) - y;
        for (w, xi) in self.w.iter_mut().zip(x) {
            *w -= eta * g * xi;
        }
        if self.fit_intercept {
            self.bias -= eta * g;
        }
        self.updates += 1;
        let k = self.updates as f64;
        for (wb, w) in self.w_bar.iter_mut().zip(&self.w) {
            *wb += (w - *wb) / k;
        }
        self.bias_bar += (self.bias - self.bias_bar) / k;
    }
}

/// Samples are drawn uniformly with replacement from a reference set, so the
/// expected loss of the averaged model is exactly its mean loss over that set.
#[derive(Debug, Clone)]
pub struct LogRegTask {
    data: Arc<Dataset>,
    driver: Prequential<PolyakLogistic>,
}

impl LogRegTask {
    pub fn new(data: Arc<Dataset>, eta0: f64, fit_intercept: bool) -> Result<Self> {
        check_positive("eta0", eta0)?;
        let dim = data.dim();
        Ok(Self {
            data,
            driver: Prequential::new(PolyakLogistic::new(dim, eta0, fit_intercept)),
        })
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn learner(&self) -> &PolyakLogistic {
        self.driver.learner()
    }

    pub fn truth(&self) -> f64 {
        let learner = self.driver.learner();
        let total: f64 = (0..self.data.len())
            .map(|i| {
                let (x, y) = self.data.row(i);
                learner.averaged_loss(x, y)
            })
            .sum();
        total / self.data.len() as f64
    }

    /// Streams an externally supplied sample.
    pub fn step_with(&mut self, x: &[f64], y: f64) -> Result<Step> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "sample has {} features, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        if y != 0.0 && y != 1.0 {
            return Err(Error::invalid(format!("label {y} is not 0 or 1")));
        }
        let obs = self.driver.step((x.to_vec(), y))?;
        Ok(Step {
            obs,
            truth: self.truth(),
        })
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Step> {
        let i = rng.random_range(0..self.data.len());
        let (x, y) = self.data.row(i);
        let x = x.to_vec();
        self.step_with(&x, y)
    }
}
