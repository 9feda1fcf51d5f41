use diagnet::data::{compute_stats, Dataset};
use diagnet::dynamics::{run, w_inf_ceiling, DynamicsError, NetParams, StepMode, StepperConfig, Trajectory};
use diagnet::linalg::norm_inf;
use diagnet::margins::{l1_max_margin, l2_max_margin};
use diagnet::regimes::{condition1_check, excess_norms, schedule_target, sphere_coords, StoppingRule};
use proptest::prelude::*;

/// Small datasets kept separable by a positive first coordinate.
fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..5, 2usize..4).prop_flat_map(|(n, d)| {
        prop::collection::vec((0.2f64..2.0, prop::collection::vec(-1.5f64..1.5, d - 1), prop::bool::ANY), n).prop_map(
            |rows| {
                let (points, labels) = rows
                    .into_iter()
                    .map(|(head, tail, pos)| {
                        let sign = if pos { 1.0 } else { -1.0 };
                        let mut x = vec![sign * head];
                        x.extend(tail);
                        (x, if pos { 1 } else { -1 })
                    })
                    .unzip();
                Dataset::new(points, labels).unwrap()
            },
        )
    })
}

fn short_run(data: &Dataset, depth: u32, alpha: f64, mode: StepMode, eta: f64, steps: u64) -> Trajectory {
    let cfg = StepperConfig { eta, mode, max_steps: steps, gamma_tilde_target: Some(50.0), ..Default::default() };
    match run(&NetParams::init(data.dim(), depth, alpha).unwrap(), data, &cfg) {
        Ok(t) => t,
        Err(DynamicsError::BudgetExhausted { partial, .. }) => *partial,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trajectory_invariants(data in dataset(), depth in prop::sample::select(vec![2u32, 3, 5]), alpha in 0.3f64..2.0) {
        let t = short_run(&data, depth, alpha, StepMode::Normalized, 1e-2, 300);
        let log_n = (data.len() as f64).ln();
        let xmax = compute_stats(&data).xmax;
        let mut prev = f64::NEG_INFINITY;
        for r in &t.records {
            prop_assert!(r.gamma <= r.gamma_tilde + 1e-12);
            prop_assert!(r.gamma_tilde <= r.gamma + log_n + 1e-12);
            prop_assert!(r.gamma_tilde >= prev);
            prev = r.gamma_tilde;
            let w2 = r.w.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(w2 >= r.gamma_tilde / xmax - 1e-12);
        }
        prop_assert!(t.final_params.u_plus.iter().chain(&t.final_params.u_minus).all(|&u| u >= 0.0));
    }

    #[test]
    fn plain_gd_respects_w_inf_ceiling(data in dataset(), depth in prop::sample::select(vec![2u32, 3]), alpha in 0.5f64..1.5) {
        let stats = compute_stats(&data);
        let t = short_run(&data, depth, alpha, StepMode::Plain, 1e-3, 2000);
        for r in &t.records {
            if let Some(c) = w_inf_ceiling(alpha, depth, stats.xbar, stats.gamma2, r.gamma_tilde) {
                prop_assert!(norm_inf(&r.w) <= c * (1.0 + 1e-12) + 1e-12);
            }
        }
    }

    #[test]
    fn sphere_coords_ignore_scale(w in prop::collection::vec(-5.0f64..5.0, 3), c in 1e-3f64..1e3) {
        prop_assume!(w.iter().any(|v| v.abs() > 1e-6));
        let (a, p) = sphere_coords(&w).unwrap();
        let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
        let (a2, p2) = sphere_coords(&scaled).unwrap();
        prop_assert!((a - a2).abs() < 1e-12 && (p - p2).abs() < 1e-12);
    }

    #[test]
    fn schedule_is_monotone(a1 in 0.1f64..10.0, a2 in 0.1f64..10.0, m1 in 1e-3f64..10.0, m2 in 1e-3f64..10.0, depth in 2u32..6) {
        let (lo, hi) = (a1.min(a2), a1.max(a2));
        let rule = StoppingRule::mu_scaled(m1);
        prop_assert!(schedule_target(lo, depth, &rule) <= schedule_target(hi, depth, &rule));
        let (small, big) = (m1.min(m2), m1.max(m2));
        prop_assert!(schedule_target(lo, depth, &StoppingRule::mu_scaled(small)) >= schedule_target(lo, depth, &StoppingRule::mu_scaled(big)));
        prop_assert_eq!(schedule_target(lo, depth, &StoppingRule::fixed(m1)), m1);
    }

    #[test]
    fn condition_is_monotone_in_rho0(data in dataset(), r1 in 1.001f64..3.0, r2 in 1.001f64..3.0) {
        let t = short_run(&data, 2, 1.0, StepMode::Normalized, 1e-2, 400);
        let w_hat = t.last().w_hat();
        prop_assume!(t.last().gamma > 0.0);
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        let a = condition1_check(&t.records, &data, &w_hat, lo, 0.0);
        let b = condition1_check(&t.records, &data, &w_hat, hi, 0.0);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(!b.holds || a.holds);
        }
    }

    #[test]
    fn excess_norms_ignore_scale(data in dataset(), c in 1e-3f64..1e3) {
        let l1 = l1_max_margin(&data).unwrap().w;
        let l2 = l2_max_margin(&data).unwrap().w;
        let w: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| 0.3 * a + 0.7 * b).collect();
        let (e1, e2) = excess_norms(&w, &data, &l1, &l2).unwrap();
        let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
        let (f1, f2) = excess_norms(&scaled, &data, &l1, &l2).unwrap();
        prop_assert!((e1 - f1).abs() < 1e-9 && (e2 - f2).abs() < 1e-9);
        prop_assert!(e1 >= -1e-9 && e2 >= -1e-9);
    }
}
