use diagnet::data::presets;
use diagnet::dynamics::{
    closed_form_residual, linearized_run, read_trajectory_csv, run, run_observed, step, trajectory_from_json,
    trajectory_to_json, write_trajectory_csv, DynamicsError, NetParams, StepMode, StepperConfig, Trajectory,
    TrajectoryRecord,
};
use diagnet::linalg::{angle_deg, norm_inf};
use diagnet::margins::{l1_max_margin, l2_max_margin};

fn target_cfg(eta: f64, target: f64) -> StepperConfig {
    StepperConfig { eta, gamma_tilde_target: Some(target), ..Default::default() }
}

/// Linear interpolation of `w` at smoothed margin `g`.
fn w_at(traj: &Trajectory, g: f64) -> Vec<f64> {
    let r = &traj.records;
    let i = r.iter().position(|x| x.gamma_tilde >= g).expect("trajectory covers g");
    if i == 0 {
        return r[0].w.clone();
    }
    let (a, b) = (&r[i - 1], &r[i]);
    let t = (g - a.gamma_tilde) / (b.gamma_tilde - a.gamma_tilde);
    a.w.iter().zip(&b.w).map(|(x, y)| x + t * (y - x)).collect()
}

#[test]
fn closed_form_residual_halves_with_eta() {
    let data = presets::unique_l1();
    for depth in [2u32, 3] {
        let mut worst = Vec::new();
        for eta in [2e-4, 1e-4] {
            let p = NetParams::init(3, depth, 1.0).unwrap();
            let mut m: f64 = 0.0;
            run_observed(&p, &data, &target_cfg(eta, 20.0), |_, r| {
                m = m.max(closed_form_residual(r, 1.0, depth).unwrap() / norm_inf(&r.w).max(1.0));
            })
            .unwrap();
            worst.push(m);
        }
        assert!(worst[0] <= 1e-2, "D={depth}");
        let ratio = worst[1] / worst[0];
        assert!((0.45..0.55).contains(&ratio), "D={depth} ratio {ratio}");
    }
}

#[test]
fn plain_and_normalized_agree_at_matched_margin() {
    let data = presets::unique_l1();
    let p = NetParams::init(3, 2, 1.0).unwrap();
    let plain = run(&p, &data, &StepperConfig { mode: StepMode::Plain, ..target_cfg(2e-3, 3.0) }).unwrap();
    let norm = run(&p, &data, &target_cfg(2e-5, 3.0)).unwrap();
    for g in [0.5, 1.0, 2.0, 2.9] {
        let (a, b) = (w_at(&plain, g), w_at(&norm, g));
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-3 * norm_inf(&b).max(1.0), "g={g} diff {diff}");
    }
}

#[test]
fn plain_mode_reports_underflow() {
    let data = presets::unique_l1();
    let p = NetParams::new(vec![40.0; 3], vec![1.0; 3], 2, 1.0).unwrap();
    let prev = TrajectoryRecord {
        step: 0,
        log_flow_time: 0.0,
        gamma: 0.0,
        gamma_tilde: 0.0,
        w: Vec::new(),
        s_accum: Vec::new(),
        metrics: Default::default(),
    };
    let cfg = StepperConfig { mode: StepMode::Plain, ..Default::default() };
    let err = step(&p, &data, &cfg, &prev).unwrap_err();
    assert!(matches!(err, DynamicsError::Underflow { .. }), "{err}");
}

#[test]
fn linearized_flow_tracks_l2_direction() {
    let data = presets::unique_l1();
    let path = linearized_run(&data, 1.0, 2, 1e-2, 1e3, 1_000_000).unwrap();
    let l2 = l2_max_margin(&data).unwrap();
    assert!(angle_deg(&path.last().unwrap().1, &l2.w) < 2.0);
}

#[test]
fn smaller_init_ends_closer_to_l1_direction() {
    let data = presets::unique_l1();
    let l1 = l1_max_margin(&data).unwrap();
    let angles: Vec<f64> = [1.0, 0.3, 0.1]
        .iter()
        .map(|&a| {
            let t = run(&NetParams::init(3, 2, a).unwrap(), &data, &target_cfg(1e-4, 1e3)).unwrap();
            angle_deg(&t.last().w, &l1.w)
        })
        .collect();
    assert!(angles.windows(2).all(|w| w[1] < w[0]), "{angles:?}");
    assert!(angles[2] < 1.0, "{angles:?}");
}

#[test]
fn deep_network_reaches_target_with_capped_steps() {
    let data = presets::unique_l1();
    let cfg = StepperConfig { max_relative_change: Some(1e-3), ..target_cfg(1e-3, 200.0) };
    let t = run(&NetParams::init(3, 10, 1.0).unwrap(), &data, &cfg).unwrap();
    assert!(t.reached_target);
    assert!((t.last().gamma_tilde - 200.0).abs() <= 1e-6 * 200.0);
    let u = t.final_params.u_plus.iter().chain(&t.final_params.u_minus);
    assert!(u.clone().all(|&x| x >= 0.0 && x.is_finite()));
}

#[test]
fn budget_exhaustion_returns_partial_run() {
    let data = presets::unique_l1();
    let cfg = StepperConfig { max_steps: 50, ..target_cfg(1e-4, 1e3) };
    match run(&NetParams::init(3, 2, 1.0).unwrap(), &data, &cfg) {
        Err(DynamicsError::BudgetExhausted { steps, partial, .. }) => {
            assert_eq!(steps, 50);
            assert_eq!(partial.last().step, 50);
            assert!(!partial.reached_target);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn exported_runs_round_trip() {
    let data = presets::kinked_path();
    let cfg = StepperConfig { record_every: 7, ..target_cfg(1e-2, 30.0) };
    let t = run(&NetParams::init(3, 3, 0.8).unwrap(), &data, &cfg).unwrap();
    assert_eq!(t.records[1].step, 7);
    let mut buf = Vec::new();
    write_trajectory_csv(&t, "depth = 3", &mut buf).unwrap();
    let back = read_trajectory_csv(&buf[..]).unwrap();
    assert_eq!(back.len(), t.records.len());
    for (a, b) in back.iter().zip(&t.records) {
        assert_eq!((a.step, a.gamma, a.gamma_tilde, &a.w), (b.step, b.gamma, b.gamma_tilde, &b.w));
        assert_eq!(a.log_flow_time.to_bits(), b.log_flow_time.to_bits());
    }
    let json = trajectory_to_json(&t, serde_json::json!({ "eta": 1e-2 }));
    let (cfg_back, t_back) = trajectory_from_json(&json).unwrap();
    assert_eq!(cfg_back["eta"], 1e-2);
    assert_eq!(t_back, t);
}
