use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::prequential::{Learner, Prequential};
use super::sampling::{sample_unit_sphere, Covariance};
use super::Step;
use crate::error::{check_non_negative, check_positive, Error, Result};

pub const DEFAULT_LINREG_ETA0: f64 = 0.01;
pub const NOISE_GRID: [f64; 3] = [0.005, 0.05, 0.5];

/// Online gradient descent on the scaled squared error `(w'x - y)^2 / d`.
#[derive(Debug, Clone)]
pub struct OgdLinear {
    w: Vec<f64>,
    eta0: f64,
}

impl OgdLinear {
    pub fn new(dim: usize, eta0: f64) -> Self {
        Self {
            w: vec![0.0; dim],
            eta0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    fn residual(&self, (x, y): &(Vec<f64>, f64)) -> f64 {
        dot(&self.w, x) - y
    }
}

impl Learner for OgdLinear {
    type Sample = (Vec<f64>, f64);

    fn loss(&self, sample: &Self::Sample) -> f64 {
        self.residual(sample).powi(2) / self.w.len() as f64
    }

    fn update(&mut self, sample: &Self::Sample, t: u64) {
        let eta = self.eta0 / (t as f64).sqrt();
        let scale = eta * 2.0 * self.residual(sample) / self.w.len() as f64;
        for (w, x) in self.w.iter_mut().zip(&sample.0) {
            *w -= scale * x;
        }
    }
}

/// Gaussian linear regression with a known optimum, so the expected loss of
/// any weight vector is available in closed form.
#[derive(Debug, Clone)]
pub struct LinRegTask {
    w_true: Vec<f64>,
    cov: Covariance,
    noise: Normal<f64>,
    noise_std: f64,
    driver: Prequential<OgdLinear>,
}

impl LinRegTask {
    pub fn new<R: Rng + ?Sized>(
        dim: usize,
        noise_std: f64,
        eta0: f64,
        rho: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let cov = Covariance::equicorrelated(dim, rho)?;
        let w_true = sample_unit_sphere(dim, rng)?;
        Self::with_parameters(w_true, cov, noise_std, eta0)
    }

    pub fn with_parameters(
        w_true: Vec<f64>,
        cov: Covariance,
        noise_std: f64,
        eta0: f64,
    ) -> Result<Self> {
        check_non_negative("noise_std", noise_std)?;
        check_positive("eta0", eta0)?;
        let dim = cov.dim();
        if w_true.len() != dim {
            return Err(Error::invalid(format!(
                "w_true has {} entries, covariance is {dim}-dimensional",
                w_true.len()
            )));
        }
        if (0..dim).any(|i| (cov.entry(i, i) - 1.0).abs() > 1e-12) {
            return Err(Error::invalid("covariance must have a unit diagonal"));
        }
        let noise = Normal::new(0.0, noise_std).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(Self {
            w_true,
            cov,
            noise,
            noise_std,
            driver: Prequential::new(OgdLinear::new(dim, eta0)),
        })
    }

    pub fn dim(&self) -> usize {
        self.w_true.len()
    }

    pub fn w_true(&self) -> &[f64] {
        &self.w_true
    }

    pub fn covariance(&self) -> &Covariance {
        &self.cov
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn weights(&self) -> &[f64] {
        self.driver.learner().weights()
    }

    /// `((w - w*)' S (w - w*) + noise^2) / d`.
    pub fn expected_loss(&self, w: &[f64]) -> f64 {
        let diff: Vec<f64> = w.iter().zip(&self.w_true).map(|(a, b)| a - b).collect();
        (self.cov.quadratic_form(&diff) + self.noise_std.powi(2)) / self.dim() as f64
    }

    pub fn truth(&self) -> f64 {
        self.expected_loss(self.weights())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, f64) {
        let x = self.cov.sample(rng);
        let y = dot(&self.w_true, &x) + self.noise.sample(rng);
        (x, y)
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Step> {
        let sample = self.draw(rng);
        let obs = self.driver.step(sample)?;
        Ok(Step {
            obs,
            truth: self.truth(),
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
