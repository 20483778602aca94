//! Mixing weights and the variance-bound recursion.
//!
//! With `V` the previous variance bound, `sigma` the stability bound and `b`
//! the loss standard-deviation bound, one step of the recursion is
//!
//! ```text
//! V' = (gamma * b + (1 - gamma) * sigma)^2 + (1 - gamma)^2 * V
//! ```
//!
//! which is quadratic in `gamma`; [`gamma_optimal`] is its minimiser over
//! `[0, 1]` and [`optimal_variance`] the resulting minimum in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, Error, Result};

/// Variance-minimising weight.
///
/// * `1` when `sigma >= b` (the previous estimate carries no information),
/// * `0` when `var_prev <= sigma * (b - sigma)`,
/// * `(var_prev - sigma (b - sigma)) / (var_prev + (b - sigma)^2)` otherwise.
///
/// The two boundary cases can only both hold at `sigma == b`; `1` wins.
pub fn gamma_optimal(var_prev: f64, sigma: f64, b: f64) -> Result<f64> {
    check_non_negative("previous variance bound", var_prev)?;
    check_non_negative("sigma", sigma)?;
    check_positive("b", b)?;
    if sigma >= b {
        return Ok(1.0);
    }
    let gap = b - sigma;
    let threshold = sigma * gap;
    if var_prev <= threshold {
        return Ok(0.0);
    }
    let gamma = (var_prev - threshold) / (var_prev + gap * gap);
    Ok(gamma.clamp(0.0, 1.0))
}

/// One step of the variance-bound recursion for an arbitrary weight.
pub fn variance_step(var_prev: f64, gamma: f64, sigma: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    check_non_negative("previous variance bound", var_prev)?;
    check_non_negative("sigma", sigma)?;
    check_non_negative("b", b)?;
    let keep = 1.0 - gamma;
    let fresh = gamma * b + keep * sigma;
    Ok(fresh * fresh + keep * keep * var_prev)
}

/// Closed-form value of `variance_step(V, gamma_optimal(V, sigma, b), sigma, b)`.
pub fn optimal_variance(var_prev: f64, sigma: f64, b: f64) -> Result<f64> {
    check_non_negative("previous variance bound", var_prev)?;
    check_non_negative("sigma", sigma)?;
    check_positive("b", b)?;
    if sigma >= b {
        return Ok(b * b);
    }
    let gap = b - sigma;
    if var_prev <= sigma * gap {
        return Ok(sigma * sigma + var_prev);
    }
    Ok(b * b * var_prev / (var_prev + gap * gap))
}

/// How the per-step weight is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WeightPolicy {
    /// Minimise the variance bound at every step.
    #[default]
    Optimal,
    /// Closed-form `gamma_t = max(1/t, min(1, kappa * sigma_t))`, for which
    /// the variance bound is `O(max(1/t, sigma_t))`.
    RateConstrained {
        #[serde(default = "default_kappa")]
        kappa: f64,
    },
}

fn default_kappa() -> f64 {
    1.0
}

impl WeightPolicy {
    pub fn rate_constrained() -> Self {
        WeightPolicy::RateConstrained { kappa: 1.0 }
    }

    /// `step` counts from 1 at the most recent reset of the recursion.
    pub fn gamma(&self, step: u64, var_prev: f64, sigma: f64, b: f64) -> Result<f64> {
        match *self {
            WeightPolicy::Optimal => gamma_optimal(var_prev, sigma, b),
            WeightPolicy::RateConstrained { kappa } => {
                check_positive("kappa", kappa)?;
                check_non_negative("sigma", sigma)?;
                if step < 1 {
                    return Err(Error::invalid("step index must be >= 1"));
                }
                let floor = 1.0 / step as f64;
                Ok(floor.max((kappa * sigma).min(1.0)).clamp(0.0, 1.0))
            }
        }
    }
}
