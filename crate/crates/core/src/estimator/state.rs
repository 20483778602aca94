use serde::{Deserialize, Serialize};

use super::weights::{variance_step, WeightPolicy};
use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::stats::sample_variance;

/// Default burn-in length used to estimate the constants.
pub const DEFAULT_BURN_IN: u64 = 30;
/// Default floor for the estimated squared constants.
pub const DEFAULT_EPS_FLOOR: f64 = 1e-8;
/// Constants used before (or instead of) adaptive estimation.
pub const DEFAULT_B_HAT: f64 = 2.0;
pub const DEFAULT_C_HAT: f64 = 1.0;

/// Consecutive full resets after which the loss-scale estimate is reported
/// as degenerate.
pub const DEGENERATE_RESET_RUN: u64 = 50;

/// One step's pair of evaluations of the incoming sample(s): under the
/// freshly updated model (`loss_curr`) and under the model from the previous
/// step (`loss_prev`). With `batch_size > 1` both are batch means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossObservation {
    pub loss_curr: f64,
    pub loss_prev: f64,
    pub batch_size: u32,
}

impl LossObservation {
    pub fn new(loss_curr: f64, loss_prev: f64) -> Result<Self> {
        Self::batched(loss_curr, loss_prev, 1)
    }

    pub fn batched(loss_curr: f64, loss_prev: f64, batch_size: u32) -> Result<Self> {
        let obs = Self {
            loss_curr,
            loss_prev,
            batch_size,
        };
        obs.validate()?;
        Ok(obs)
    }

    /// A function that does not change between steps evaluates the sample
    /// identically under both models.
    pub fn unchanged(loss: f64) -> Result<Self> {
        Self::new(loss, loss)
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("loss_curr", self.loss_curr)?;
        check_non_negative("loss_prev", self.loss_prev)?;
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    BurnIn,
    Running,
}

/// Counters that do not affect the estimate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Burn-in steps whose stability sample was dropped because `r(t) = 0`.
    pub skipped_rate_divisions: u64,
    /// Steps on which the weight was exactly 1.
    pub resets: u64,
    pub max_consecutive_resets: u64,
    pub degenerate_scale: bool,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_sum: f64,
    pub gamma_count: u64,
    pub last_gamma: f64,
}

impl Diagnostics {
    fn record_gamma(&mut self, gamma: f64) {
        if self.gamma_count == 0 {
            self.gamma_min = gamma;
            self.gamma_max = gamma;
        } else {
            self.gamma_min = self.gamma_min.min(gamma);
            self.gamma_max = self.gamma_max.max(gamma);
        }
        self.gamma_sum += gamma;
        self.gamma_count += 1;
        self.last_gamma = gamma;
    }

    pub fn gamma_mean(&self) -> Option<f64> {
        (self.gamma_count > 0).then(|| self.gamma_sum / self.gamma_count as f64)
    }
}

/// Live state of the recursive estimator.
///
/// All updates are O(1) in time and memory once the burn-in buffers (at most
/// `burn_in` entries each) have been released.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorState {
    t: u64,
    estimate: f64,
    var_bound: f64,
    gamma_prod: f64,
    b_hat: f64,
    c_hat: f64,
    burn_in: u64,
    eps_floor: f64,
    burn_buffer_b: Vec<f64>,
    burn_buffer_c: Vec<f64>,
    batch_sum_b: u64,
    batch_sum_c: u64,
    phase: Phase,
    since_reset: u64,
    consecutive_resets: u64,
    diagnostics: Diagnostics,
}

impl EstimatorState {
    /// Constants are estimated from the first `burn_in - 1` steps; the
    /// recursion starts at step `burn_in`.
    pub fn adaptive(burn_in: u64, eps_floor: f64) -> Result<Self> {
        if burn_in < 2 {
            return Err(Error::invalid("burn-in must be at least 2 steps"));
        }
        check_positive("eps floor", eps_floor)?;
        let cap = burn_in as usize;
        Ok(Self {
            burn_buffer_b: Vec::with_capacity(cap),
            burn_buffer_c: Vec::with_capacity(cap),
            phase: Phase::BurnIn,
            ..Self::blank(DEFAULT_B_HAT, DEFAULT_C_HAT, burn_in, eps_floor)
        })
    }

    /// Known constants; the recursion starts at the first observation.
    pub fn fixed(b_hat: f64, c_hat: f64) -> Result<Self> {
        check_positive("b_hat", b_hat)?;
        check_non_negative("c_hat", c_hat)?;
        Ok(Self::blank(b_hat, c_hat, 0, DEFAULT_EPS_FLOOR))
    }

    fn blank(b_hat: f64, c_hat: f64, burn_in: u64, eps_floor: f64) -> Self {
        Self {
            t: 0,
            estimate: f64::NAN,
            var_bound: b_hat * b_hat,
            gamma_prod: 1.0,
            b_hat,
            c_hat,
            burn_in,
            eps_floor,
            burn_buffer_b: Vec::new(),
            burn_buffer_c: Vec::new(),
            batch_sum_b: 0,
            batch_sum_c: 0,
            phase: Phase::Running,
            since_reset: 0,
            consecutive_resets: 0,
            diagnostics: Diagnostics::default(),
        }
    }

    /// Number of observations consumed so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Current estimate; `None` before the first observation.
    pub fn estimate(&self) -> Option<f64> {
        (self.t > 0).then_some(self.estimate)
    }

    pub fn var_bound(&self) -> f64 {
        self.var_bound
    }

    pub fn gamma_prod(&self) -> f64 {
        self.gamma_prod
    }

    pub fn b_hat(&self) -> f64 {
        self.b_hat
    }

    pub fn c_hat(&self) -> f64 {
        self.c_hat
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in
    }

    pub fn eps_floor(&self) -> f64 {
        self.eps_floor
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Steps since the recursion was last (re)started, counting the restart.
    pub fn steps_since_reset(&self) -> u64 {
        self.since_reset
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    /// Whether the variance bound is meaningful, i.e. the recursion has run
    /// at least once.
    pub fn is_running(&self) -> bool {
        self.phase == Phase::Running && self.since_reset > 0
    }

    /// Burn-in step. The first step and step `burn_in` restart the estimate at
    /// the raw loss; in between the recursion runs with the current constant
    /// estimates, which start at the defaults and are refreshed from the
    /// buffered losses and scaled loss changes once two of each are available.
    /// Step `burn_in` fixes the constants and switches to the running phase.
    pub fn burn_in_update(
        &mut self,
        obs: &LossObservation,
        rate: f64,
        policy: &WeightPolicy,
    ) -> Result<f64> {
        if self.phase != Phase::BurnIn {
            return Err(Error::State("burn-in already finished".into()));
        }
        obs.validate()?;
        check_non_negative("rate", rate)?;

        if self.t + 1 >= self.burn_in {
            self.t += 1;
            self.refresh_constants(true);
            self.restart(obs);
            self.phase = Phase::Running;
            self.burn_buffer_b = Vec::new();
            self.burn_buffer_c = Vec::new();
            return Ok(self.estimate);
        }

        if self.since_reset == 0 {
            self.t += 1;
            self.restart(obs);
        } else {
            self.recurse(obs, self.c_hat * rate, policy)?;
        }

        self.burn_buffer_b.push(obs.loss_curr);
        self.batch_sum_b += u64::from(obs.batch_size);
        // the first step has no earlier model to compare against
        if self.t > 1 {
            if rate > 0.0 {
                self.burn_buffer_c
                    .push((obs.loss_curr - obs.loss_prev) / rate);
                self.batch_sum_c += u64::from(obs.batch_size);
            } else {
                self.diagnostics.skipped_rate_divisions += 1;
            }
        }
        self.refresh_constants(false);
        Ok(self.estimate)
    }

    /// Buffered values are batch means, so their spread is rescaled by the
    /// average batch size to per-sample units. Before `finalize`, a constant
    /// keeps its current value until its buffer holds two values.
    fn refresh_constants(&mut self, finalize: bool) {
        let eps = self.eps_floor;
        let scaled = |buf: &[f64], batch_sum: u64| -> Option<f64> {
            sample_variance(buf)
                .map(|v| (v * batch_sum as f64 / buf.len() as f64).max(eps))
        };
        let fallback = |current: f64| if finalize { eps } else { current * current };
        let b2 = scaled(&self.burn_buffer_b, self.batch_sum_b)
            .unwrap_or_else(|| fallback(self.b_hat));
        let c2 = scaled(&self.burn_buffer_c, self.batch_sum_c)
            .unwrap_or_else(|| fallback(self.c_hat));
        self.b_hat = b2.sqrt();
        self.c_hat = c2.sqrt();
    }

    fn restart(&mut self, obs: &LossObservation) {
        let b = self.b_hat / f64::from(obs.batch_size).sqrt();
        self.estimate = obs.loss_curr;
        self.var_bound = b * b;
        self.gamma_prod = 1.0;
        self.since_reset = 1;
    }

    /// One recursive update with stability bound `sigma` (per-sample units).
    pub fn oeuvre_update(
        &mut self,
        obs: &LossObservation,
        sigma: f64,
        policy: &WeightPolicy,
    ) -> Result<f64> {
        if self.phase != Phase::Running {
            return Err(Error::State(
                "recursive update called during burn-in".into(),
            ));
        }
        obs.validate()?;
        if self.since_reset == 0 {
            check_non_negative("sigma", sigma)?;
            self.t += 1;
            self.restart(obs);
            return Ok(self.estimate);
        }
        self.recurse(obs, sigma, policy)
    }

    fn recurse(
        &mut self,
        obs: &LossObservation,
        sigma: f64,
        policy: &WeightPolicy,
    ) -> Result<f64> {
        check_non_negative("sigma", sigma)?;
        let scale = 1.0 / f64::from(obs.batch_size).sqrt();
        let sigma_b = sigma * scale;
        let b = self.b_hat * scale;
        let gamma = policy.gamma(self.since_reset + 1, self.var_bound, sigma_b, b)?;
        let keep = 1.0 - gamma;

        self.estimate = obs.loss_curr + keep * (self.estimate - obs.loss_prev);
        self.var_bound = variance_step(self.var_bound, gamma, sigma_b, b)?;
        self.t += 1;
        self.diagnostics.record_gamma(gamma);

        if keep == 0.0 {
            // full reset: a new martingale starts here
            self.gamma_prod = 1.0;
            self.since_reset = 1;
            self.diagnostics.resets += 1;
            self.consecutive_resets += 1;
            self.diagnostics.max_consecutive_resets = self
                .diagnostics
                .max_consecutive_resets
                .max(self.consecutive_resets);
            if self.consecutive_resets >= DEGENERATE_RESET_RUN
                && !self.diagnostics.degenerate_scale
            {
                self.diagnostics.degenerate_scale = true;
                log::warn!(
                    "b_hat = {:.3e} does not exceed sigma for {} consecutive steps; \
                     the estimator is resetting every step",
                    self.b_hat,
                    self.consecutive_resets
                );
            }
        } else {
            self.gamma_prod *= keep;
            self.since_reset += 1;
            self.consecutive_resets = 0;
        }
        Ok(self.estimate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(curr: f64, prev: f64) -> LossObservation {
        LossObservation::new(curr, prev).unwrap()
    }

    #[test]
    fn hand_computed_update() {
        // rate-constrained rule at step 10 with sigma = 0.2 gives gamma = 0.2
        let mut st = EstimatorState::fixed(1.0, 0.0).unwrap();
        st.oeuvre_update(&obs(0.6, 0.6), 0.0, &WeightPolicy::Optimal)
            .unwrap();
        let policy = WeightPolicy::RateConstrained { kappa: 1.0 };
        for _ in 0..8 {
            st.oeuvre_update(&obs(0.6, 0.6), 0.0, &policy).unwrap();
        }
        assert!((st.estimate().unwrap() - 0.6).abs() < 1e-15);
        let est = st.oeuvre_update(&obs(0.4, 0.5), 0.2, &policy).unwrap();
        assert!((est - 0.48).abs() < 1e-12, "{est}");
    }

    #[test]
    fn sigma_above_b_resets_to_current_loss() {
        let mut st = EstimatorState::fixed(1.0, 1.0).unwrap();
        st.oeuvre_update(&obs(0.3, 0.3), 0.0, &WeightPolicy::Optimal)
            .unwrap();
        st.oeuvre_update(&obs(0.9, 0.1), 0.0, &WeightPolicy::Optimal)
            .unwrap();
        let est = st
            .oeuvre_update(&obs(0.75, 0.2), 2.0, &WeightPolicy::Optimal)
            .unwrap();
        assert_eq!(est, 0.75);
        assert_eq!(st.var_bound(), 1.0);
        assert_eq!(st.gamma_prod(), 1.0);
        assert_eq!(st.diagnostics().resets, 1);
    }

    #[test]
    fn static_stream_gives_running_means() {
        let mut st = EstimatorState::fixed(1.0, 0.0).unwrap();
        let mut got = vec![];
        for l in [1.0, 2.0, 3.0] {
            got.push(
                st.oeuvre_update(&obs(l, l), 0.0, &WeightPolicy::Optimal)
                    .unwrap(),
            );
        }
        assert_eq!(got, vec![1.0, 1.5, 2.0]);
        assert!((st.gamma_prod() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn first_step_initialises_variance_to_b_squared() {
        let mut st = EstimatorState::fixed(1.5, 0.0).unwrap();
        st.oeuvre_update(&obs(0.2, 0.2), 0.0, &WeightPolicy::Optimal)
            .unwrap();
        assert_eq!(st.var_bound(), 2.25);
        assert_eq!(st.t(), 1);
    }

    #[test]
    fn identical_burn_in_losses_hit_the_floor() {
        let mut st = EstimatorState::adaptive(5, 1e-8).unwrap();
        for _ in 0..5 {
            st.burn_in_update(&obs(0.7, 0.7), 1.0, &WeightPolicy::Optimal).unwrap();
        }
        assert_eq!(st.phase(), Phase::Running);
        assert!((st.b_hat() * st.b_hat() - 1e-8).abs() < 1e-20);
        assert!((st.c_hat() * st.c_hat() - 1e-8).abs() < 1e-20);
    }

    #[test]
    fn burn_in_buffer_variance() {
        let mut st = EstimatorState::adaptive(10, 1e-8).unwrap();
        st.burn_in_update(&obs(0.0, 0.0), 1.0, &WeightPolicy::Optimal).unwrap();
        st.burn_in_update(&obs(2.0, 2.0), 1.0, &WeightPolicy::Optimal).unwrap();
        // B = {0, 2}: unbiased variance 2
        assert!((st.b_hat() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(st.phase(), Phase::BurnIn);
    }

    #[test]
    fn burn_in_runs_recursion_between_restarts() {
        let mut st = EstimatorState::adaptive(4, 1e-8).unwrap();
        let p = WeightPolicy::Optimal;
        assert_eq!(st.burn_in_update(&obs(0.5, 0.51), 0.5, &p).unwrap(), 0.5);
        assert_eq!(st.var_bound(), 4.0);
        // defaults c = 1, b = 2, sigma = 0.5: gamma = (4 - 0.75) / (4 + 2.25) = 0.52
        let l2 = st.burn_in_update(&obs(0.9, 0.91), 0.5, &p).unwrap();
        assert!((l2 - (0.9 + 0.48 * (0.5 - 0.91))).abs() < 1e-15);
        assert!((st.var_bound() - 2.56).abs() < 1e-12);
        // B = {0.5, 0.9} gives b^2 = 0.08; C has one value so c stays 1
        assert!((st.b_hat() - 0.08f64.sqrt()).abs() < 1e-15);
        assert_eq!(st.c_hat(), 1.0);
        // sigma = 0.5 now exceeds b, so the weight is 1
        assert_eq!(st.burn_in_update(&obs(0.1, 0.11), 0.5, &p).unwrap(), 0.1);
        assert_eq!(st.phase(), Phase::BurnIn);
        assert_eq!(st.burn_in_update(&obs(0.4, 0.41), 0.5, &p).unwrap(), 0.4);
        assert_eq!(st.phase(), Phase::Running);
        assert_eq!(st.gamma_prod(), 1.0);
        assert!((st.var_bound() - st.b_hat().powi(2)).abs() < 1e-15);
        assert!(st.burn_in_update(&obs(0.1, 0.1), 1.0, &p).is_err());
    }

    #[test]
    fn zero_rate_skips_stability_sample() {
        let mut st = EstimatorState::adaptive(5, 1e-8).unwrap();
        for _ in 0..4 {
            st.burn_in_update(&obs(0.1, 0.2), 0.0, &WeightPolicy::Optimal).unwrap();
        }
        assert_eq!(st.diagnostics().skipped_rate_divisions, 3);
    }

    #[test]
    fn update_during_burn_in_is_a_state_error() {
        let mut st = EstimatorState::adaptive(5, 1e-8).unwrap();
        let err = st
            .oeuvre_update(&obs(0.1, 0.1), 0.0, &WeightPolicy::Optimal)
            .unwrap_err();
        assert!(matches!(err, Error::State(_)));
    }

    #[test]
    fn rejects_bad_observations() {
        assert!(LossObservation::new(f64::NAN, 0.0).is_err());
        assert!(LossObservation::new(0.1, -0.1).is_err());
        assert!(LossObservation::batched(0.1, 0.1, 0).is_err());
        let mut st = EstimatorState::fixed(1.0, 0.1).unwrap();
        let bad = LossObservation {
            loss_curr: f64::INFINITY,
            loss_prev: 0.0,
            batch_size: 1,
        };
        assert!(st.oeuvre_update(&bad, 0.1, &WeightPolicy::Optimal).is_err());
    }

    #[test]
    fn batching_scales_variance_bound() {
        let mut single = EstimatorState::fixed(1.0, 0.0).unwrap();
        let mut batch = EstimatorState::fixed(1.0, 0.0).unwrap();
        for _ in 0..20 {
            single
                .oeuvre_update(&obs(0.5, 0.5), 0.1, &WeightPolicy::Optimal)
                .unwrap();
            batch
                .oeuvre_update(
                    &LossObservation::batched(0.5, 0.5, 4).unwrap(),
                    0.1,
                    &WeightPolicy::Optimal,
                )
                .unwrap();
        }
        assert!((batch.var_bound() * 4.0 - single.var_bound()).abs() < 1e-12);
    }

    #[test]
    fn persistent_resets_flag_degenerate_scale() {
        let mut st = EstimatorState::fixed(0.1, 1.0).unwrap();
        for _ in 0..60 {
            st.oeuvre_update(&obs(0.5, 0.4), 1.0, &WeightPolicy::Optimal)
                .unwrap();
        }
        assert!(st.diagnostics().degenerate_scale);
        assert_eq!(st.diagnostics().max_consecutive_resets, 59);
    }
}
