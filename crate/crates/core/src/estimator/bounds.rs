//! Confidence bounds derived from the variance-bound recursion.
//!
//! Both bounds assume losses bounded in `[0, b]`. The fixed-time bound is an
//! Azuma-Hoeffding inversion at a single step; the time-uniform boundary holds
//! simultaneously over a whole horizon for the rescaled martingale
//! `M_t / Gamma_t`.

use serde::{Deserialize, Serialize};

use super::state::EstimatorState;
use crate::error::{check_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    FixedTime,
    TimeUniform,
}

/// Either a failure probability (fixed-time) or the exponent `c` of a
/// `2 exp(-c)` failure probability (time-uniform).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundLevel {
    Delta(f64),
    Exponent(f64),
}

impl BoundLevel {
    pub fn failure_probability(&self) -> f64 {
        match *self {
            BoundLevel::Delta(d) => d,
            BoundLevel::Exponent(c) => (2.0 * (-c).exp()).min(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBound {
    pub center: f64,
    pub half_width: f64,
    pub kind: BoundKind,
    pub level: BoundLevel,
}

impl ConfidenceBound {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, value: f64) -> bool {
        (value - self.center).abs() <= self.half_width
    }
}

/// `sqrt(2 V ln(2 / delta))`, the inversion of
/// `P(|M| >= eps) <= 2 exp(-eps^2 / (2 V))`.
pub fn fixed_time_half_width(var_bound: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !var_bound.is_finite() || var_bound < 0.0 {
        return Err(Error::invalid(format!("invalid variance bound {var_bound}")));
    }
    Ok((2.0 * var_bound * (2.0 / delta).ln()).sqrt())
}

pub fn fixed_time_ci(state: &EstimatorState, delta: f64) -> Result<ConfidenceBound> {
    if !state.is_running() {
        return Err(Error::State(
            "confidence bounds need a running estimator".into(),
        ));
    }
    Ok(ConfidenceBound {
        center: state.estimate().unwrap_or(f64::NAN),
        half_width: fixed_time_half_width(state.var_bound(), delta)?,
        kind: BoundKind::FixedTime,
        level: BoundLevel::Delta(delta),
    })
}

/// Time-uniform boundary over steps `1..=horizon` of `history`, where each
/// entry is `(var_bound, gamma_prod)` of one step of a single uninterrupted
/// run of the recursion.
///
/// ```text
/// h_t = sqrt(c / (2 V_T)) * (V_T * G_t / G_T + V_t * G_T / G_t)
/// ```
///
/// holds for all `t <= T` at once with probability at least `1 - 2 exp(-c)`.
pub fn time_uniform_boundary(history: &[(f64, f64)], horizon: usize, c: f64) -> Result<Vec<f64>> {
    if history.is_empty() || horizon == 0 {
        return Err(Error::invalid("time-uniform boundary needs a non-empty history"));
    }
    if horizon > history.len() {
        return Err(Error::invalid(format!(
            "horizon {horizon} exceeds history length {}",
            history.len()
        )));
    }
    check_positive("c", c)?;
    for &(v, g) in &history[..horizon] {
        if !(v.is_finite() && v > 0.0 && g.is_finite() && g > 0.0) {
            return Err(Error::invalid(format!(
                "history entries need positive variance and weight product, got ({v}, {g})"
            )));
        }
    }
    let (v_end, g_end) = history[horizon - 1];
    let scale = (c / (2.0 * v_end)).sqrt();
    Ok(history[..horizon]
        .iter()
        .map(|&(v, g)| scale * (v_end * g / g_end + v * g_end / g))
        .collect())
}

/// Inflation of the variance bound caused by running the recursion with
/// estimated constants `(c_hat, b_hat)` in place of the true `(c, b)`:
/// `1 / (min(1, (c_hat/c)^2) * min(1, (b_hat/b)^2))`.
pub fn misspecification_factor(c_true: f64, c_hat: f64, b_true: f64, b_hat: f64) -> Result<f64> {
    check_positive("c", c_true)?;
    check_positive("c_hat", c_hat)?;
    check_positive("b", b_true)?;
    check_positive("b_hat", b_hat)?;
    let c_ratio = (c_hat / c_true).powi(2).min(1.0);
    let b_ratio = (b_hat / b_true).powi(2).min(1.0);
    Ok(1.0 / (c_ratio * b_ratio))
}
