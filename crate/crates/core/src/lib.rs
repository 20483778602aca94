//! Streaming estimates of an online learner's *current* expected loss.
//!
//! A learner that keeps training makes every past loss slightly stale. The
//! [`estimator::Oeuvre`] recursion reuses those stale losses anyway,
//! correcting each one with the difference between the loss on the newest
//! sample before and after the latest update, and picks the mixing weight
//! that minimises a running variance bound. The same bound gives
//! fixed-time and time-uniform confidence intervals.
//!
//! Around it sit window and decay [`baselines`], synthetic prequential
//! [`tasks`] (linear regression, Hedge, logistic regression with Polyak
//! averaging, and a static stream), and a seeded [`harness`] for
//! comparisons, hyperparameter sweeps and coverage studies.
//!
//! # Examples
//!
//! ```text
//! crates/core/examples/
//! ├── running_mean.rs        frozen model: the recursion is the running mean
//! ├── batched.rs             mini-batch observations
//! ├── hedge_tracking.rs      step-by-step tracking with adaptive constants
//! ├── logistic_polyak.rs     Polyak-averaged logistic regression, optional CSV
//! ├── custom_learner.rs      your own learner via the prequential driver
//! ├── confidence_bounds.rs   intervals, boundary and coverage study
//! ├── misspecification.rs    cost of guessing the constants wrong
//! ├── linreg_experiment.rs   seeded comparison against every baseline
//! ├── baseline_sweep.rs      hindsight hyperparameter selection
//! ├── adwin_window.rs        the adaptive-window baseline under a shift
//! └── configs/               JSON experiment files for the `oeuvre` binary
//! ```
//!
//! ```text
//! cargo run --example running_mean
//! cargo run --release --example linreg_experiment -- 25 20
//! ```
//!
//! # Minimal use
//!
//! ```
//! use oeuvre::estimator::{LossObservation, Oeuvre};
//! use oeuvre::stability::StabilitySchedule;
//!
//! let mut est = Oeuvre::fixed(StabilitySchedule::inverse_sqrt_t(1.0)?, 1.0)?;
//! for (curr, prev) in [(0.40, 0.42), (0.35, 0.37), (0.38, 0.39)] {
//!     est.observe(&LossObservation::new(curr, prev)?)?;
//! }
//! let ci = est.fixed_time_ci(0.05)?;
//! assert!(ci.lower() < ci.center && ci.center < ci.upper());
//! # Ok::<(), oeuvre::error::Error>(())
//! ```

pub mod baselines;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod stability;
pub mod stats;
pub mod tasks;
