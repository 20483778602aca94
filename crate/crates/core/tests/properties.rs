use proptest::prelude::*;

use oeuvre::baselines::{BaselineEstimator, BaselineKind};
use oeuvre::estimator::{
    gamma_optimal, misspecification_factor, optimal_variance, time_uniform_boundary, variance_step,
    LossObservation, Oeuvre, WeightPolicy,
};
use oeuvre::harness::Metrics;
use oeuvre::stability::StabilitySchedule;
use oeuvre::tasks::Hedge;

fn losses(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..5.0, 1..max_len)
}

proptest! {
    #[test]
    fn gamma_is_a_weight(v in 1e-9f64..100.0, sigma in 0.0f64..5.0, b in 1e-3f64..5.0) {
        let g = gamma_optimal(v, sigma, b).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn optimal_weight_minimizes_next_variance(
        v in 1e-6f64..10.0, sigma in 0.0f64..3.0, b in 1e-2f64..3.0, other in 0.0f64..=1.0,
    ) {
        let best = optimal_variance(v, sigma, b).unwrap();
        let alt = variance_step(v, other, sigma, b).unwrap();
        prop_assert!(best <= alt * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn weight_is_scale_invariant(v in 1e-6f64..10.0, sigma in 0.0f64..3.0, b in 1e-2f64..3.0, k in 0.05f64..20.0) {
        let g = gamma_optimal(v, sigma, b).unwrap();
        let scaled = gamma_optimal(v * k * k, sigma * k, b * k).unwrap();
        prop_assert!((g - scaled).abs() < 1e-9);
    }

    #[test]
    fn rate_constrained_weight_respects_floor(step in 1u64..100_000, sigma in 0.0f64..2.0, kappa in 0.1f64..4.0) {
        let g = WeightPolicy::RateConstrained { kappa }.gamma(step, 1.0, sigma, 1.0).unwrap();
        prop_assert!(g >= 1.0 / step as f64 - 1e-15);
        prop_assert!(g <= 1.0);
        let expect = (1.0 / step as f64).max((kappa * sigma).min(1.0));
        prop_assert!((g - expect).abs() < 1e-15);
    }

    #[test]
    fn misspecified_recursion_is_dominated(
        c in 0.05f64..3.0, c_hat in 0.05f64..3.0, b in 0.05f64..3.0, b_hat in 0.05f64..3.0,
    ) {
        let factor = misspecification_factor(c, c_hat, b, b_hat).unwrap();
        prop_assert!(factor >= 1.0);
        let (mut v, mut v_hat) = (b * b, b_hat * b_hat);
        for t in 2..=500u64 {
            let r = 1.0 / t as f64;
            let g = gamma_optimal(v_hat, c_hat * r, b_hat).unwrap();
            v = variance_step(v, g, c * r, b).unwrap();
            v_hat = variance_step(v_hat, g, c_hat * r, b_hat).unwrap();
            prop_assert!(v <= factor * v_hat * (1.0 + 1e-12));
        }
    }

    #[test]
    fn static_estimate_stays_in_loss_range(xs in losses(200)) {
        let mut est = Oeuvre::fixed(StabilitySchedule::zero(), 1.0).unwrap();
        let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        for &x in &xs {
            let e = est.observe(&LossObservation::unchanged(x).unwrap()).unwrap();
            prop_assert!(e >= lo - 1e-12 && e <= hi + 1e-12);
        }
    }

    #[test]
    fn variance_bound_stays_positive_and_weights_shrink_product(
        pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..300),
        c in 0.01f64..2.0,
    ) {
        let sched = StabilitySchedule::inverse_sqrt_t(c).unwrap();
        let mut est = Oeuvre::fixed(sched, 1.0).unwrap();
        for (curr, prev) in pairs {
            let gp_before = est.state().gamma_prod();
            est.observe(&LossObservation::new(curr, prev).unwrap()).unwrap();
            let st = est.state();
            prop_assert!(st.var_bound() > 0.0);
            prop_assert!(st.gamma_prod() > 0.0 && st.gamma_prod() <= 1.0);
            if st.steps_since_reset() > 1 {
                prop_assert!(st.gamma_prod() <= gp_before);
            }
        }
    }

    #[test]
    fn boundary_ends_at_fixed_width(vs in prop::collection::vec((1e-4f64..2.0, 1e-3f64..1.0), 1..50), c in 0.1f64..5.0) {
        let h = time_uniform_boundary(&vs, vs.len(), c).unwrap();
        let (v_end, _) = vs[vs.len() - 1];
        prop_assert!((h[h.len() - 1] - (2.0 * c * v_end).sqrt()).abs() < 1e-9 * (1.0 + h[h.len() - 1]));
        prop_assert!(h.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn sliding_window_matches_brute_force(xs in losses(400), window in 1usize..60) {
        let mut sw = BaselineEstimator::new(BaselineKind::SlidingWindow { window }).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let got = sw.update(x).unwrap();
            let slice = &xs[(i + 1).saturating_sub(window)..=i];
            let want = slice.iter().sum::<f64>() / slice.len() as f64;
            prop_assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn adwin_mean_is_mean_of_retained_suffix(xs in prop::collection::vec(0.0f64..1.0, 1..600), delta in 0.001f64..0.5) {
        let mut est = BaselineEstimator::new(BaselineKind::Adwin { delta }).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let got = est.update(x).unwrap();
            let w = est.adwin().unwrap().width() as usize;
            prop_assert!(w >= 1 && w <= i + 1);
            let suffix = &xs[i + 1 - w..=i];
            let want = suffix.iter().sum::<f64>() / w as f64;
            prop_assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn smoothers_stay_in_range(xs in losses(300), decay in 0.001f64..1.0, fading in 0.5f64..1.0) {
        let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        for kind in [BaselineKind::Ema { decay }, BaselineKind::Ffpreq { fading }, BaselineKind::Prequential] {
            let mut est = BaselineEstimator::new(kind).unwrap();
            for &x in &xs {
                let e = est.update(x).unwrap();
                prop_assert!(e >= lo - 1e-12 && e <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn hedge_stays_on_simplex(rounds in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 7), 1..200)) {
        let mut h = Hedge::new(7).unwrap();
        for (t, l) in rounds.iter().enumerate() {
            h.apply(l, ((7f64).ln() / (t + 1) as f64).sqrt());
            let p = h.distribution();
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_ordering(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..100)) {
        let (est, truth): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let m = Metrics::compute(&est, &truth).unwrap();
        prop_assert!(m.bias.abs() <= m.mae + 1e-12);
        prop_assert!(m.mae <= m.rmse + 1e-12);
        let msq = est.iter().zip(&truth).map(|(e, t)| (e - t).powi(2)).sum::<f64>() / est.len() as f64;
        prop_assert!((m.rmse.powi(2) - msq).abs() <= 1e-12 * (1.0 + msq));
    }

    #[test]
    fn inverse_rates_do_not_increase(t in 1u64..1_000_000) {
        for sched in [StabilitySchedule::inverse_t(1.0).unwrap(), StabilitySchedule::inverse_sqrt_t(1.0).unwrap()] {
            prop_assert!(sched.rate(t + 1).unwrap() <= sched.rate(t).unwrap());
        }
    }
}
