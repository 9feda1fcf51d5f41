mod common;

use diagnet::data::{presets, Dataset};
use diagnet::linalg::{angle_deg, norm1};
use diagnet::margins::{
    kkt_check, l1_max_margin, l2_max_margin, log_grid, lp_quasi_stationary, q_mu_max_margin, q_path,
};
use diagnet::penalty::PenaltySpec;
use diagnet::{MarginSolution, Objective, UniqueHint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn q_path_is_continuous_and_starts_at_l2() {
    for (name, data) in [("unique-l1", presets::unique_l1()), ("kinked-path", presets::kinked_path())] {
        let grid = log_grid(1e4, 1e-4, 32);
        let path = q_path(&data, 2, &grid).unwrap();
        assert_eq!(path.len(), 32);
        let l2 = l2_max_margin(&data).unwrap();
        assert!(common::rel_dist(&path[0].w, &l2.w) < 1e-6, "{name}");
        for pair in path.windows(2) {
            assert!(angle_deg(&pair[0].w, &pair[1].w) < 10.0, "{name}");
        }
        for (sol, mu) in path.iter().zip(&grid) {
            assert!(sol.kkt_residuals.within(1e-6), "{name} mu={mu} {:?}", sol.kkt_residuals);
        }
    }
}

#[test]
fn marked_points_drift_towards_l1() {
    let data = presets::unique_l1();
    let l1 = l1_max_margin(&data).unwrap();
    let angles: Vec<f64> = [0.5, 0.1, 0.01, 0.001]
        .iter()
        .map(|&mu| angle_deg(&q_mu_max_margin(&data, &PenaltySpec::new(2, mu).unwrap()).unwrap().w, &l1.w))
        .collect();
    assert!(angles.windows(2).all(|w| w[1] < w[0]), "{angles:?}");
}

#[test]
fn many_l1_solutions_are_flagged() {
    assert_eq!(l1_max_margin(&presets::many_l1()).unwrap().unique_hint, UniqueHint::Degenerate);
    assert_eq!(l1_max_margin(&presets::unique_l1()).unwrap().unique_hint, UniqueHint::Unique);
}

#[test]
fn quasi_norm_keeps_a_one_sparse_l1_solution() {
    let data = Dataset::from_effective(vec![vec![2.0, 0.0]]).unwrap();
    let s = lp_quasi_stationary(&data, 3, &[1.0, 1.0]).unwrap();
    assert!((s.w[0] - 0.5).abs() < 1e-12 && s.w[1].abs() < 1e-12, "{:?}", s.w);
    let sparse = presets::sparse10(0);
    let l1 = l1_max_margin(&sparse).unwrap();
    if l1.w.iter().filter(|v| v.abs() > 1e-9).count() == 1 {
        let q = lp_quasi_stationary(&sparse, 3, &l1.w).unwrap();
        assert!(common::rel_dist(&q.w, &l1.w) < 1e-9);
    }
}

#[test]
fn quasi_norm_has_several_basins_on_random_data() {
    let data = presets::random10(0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut objectives: Vec<f64> = Vec::new();
    for _ in 0..4 {
        let w0: Vec<f64> = (0..data.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = lp_quasi_stationary(&data, 3, &w0).unwrap();
        assert!(s.local);
        assert!(s.kkt_residuals.within(1e-6), "{:?}", s.kkt_residuals);
        objectives.push(s.objective);
    }
    objectives.sort_by(f64::total_cmp);
    objectives.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    assert!(objectives.len() > 1, "{objectives:?}");
}

#[test]
fn every_solver_passes_its_kkt_check() {
    for (name, data) in common::small_datasets() {
        let mut sols: Vec<MarginSolution> = vec![l2_max_margin(&data).unwrap(), l1_max_margin(&data).unwrap()];
        for mu in [10.0, 0.1] {
            for depth in [2u32, 3] {
                sols.push(q_mu_max_margin(&data, &PenaltySpec::new(depth, mu).unwrap()).unwrap());
            }
        }
        for s in &sols {
            let k = kkt_check(s, &data, &s.objective_kind);
            assert!(k.within(1e-6), "{name} {:?}: {k:?}", s.objective_kind);
            let back: MarginSolution = serde_json::from_str(&s.to_json()).unwrap();
            assert_eq!(&back, s);
        }
        assert!(matches!(sols[2].objective_kind, Objective::QMu(_)));
    }
}

#[test]
fn l1_objective_is_the_l1_norm() {
    for (name, data) in common::small_datasets() {
        let s = l1_max_margin(&data).unwrap();
        assert!((norm1(&s.w) - s.objective).abs() < 1e-12, "{name}");
    }
}
