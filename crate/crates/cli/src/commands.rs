//! One adapter per subcommand: parse, dispatch, serialize.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use diagnet::dynamics::{
    closed_form_residual, kernel_distance, read_trajectory_csv, run_observed, tangent_kernel, trajectory_from_json,
    trajectory_to_json, write_records_csv, write_trajectory_csv, DynamicsError, NetParams, Trajectory,
    TrajectoryRecord,
};
use diagnet::io::{fmt_f64, write_comment_header};
use diagnet::margins::{l1_max_margin, l2_max_margin, log_grid, lp_quasi_stationary, q_mu_max_margin, q_path};
use diagnet::regimes::{
    condition1_check_window, default_window, first_exceeding, run_sweep, ConditionReport, DatasetSource,
    MetricSelection, StoppingRule, SweepSpec,
};
use diagnet::{Dataset, MarginSolution, PenaltySpec};
use serde_json::json;

use crate::config::{ObjectiveKind, RunConfig};

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// The `--out` file, or stdout.
fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(cfg: &RunConfig, text: &str) -> Result<()> {
    let mut out = sink(cfg)?;
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

/// Writes to stdout, reporting a closed pipe as an error instead of panicking.
fn say(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn out_is_json(cfg: &RunConfig) -> bool {
    cfg.out.as_deref().is_some_and(is_json)
}

/// Runs the configured simulation, recording the requested metrics. A budget
/// overrun still yields the partial trajectory alongside the error.
fn simulate_with_metrics(cfg: &RunConfig, data: &Dataset, kernel: bool) -> Result<(Trajectory, Option<DynamicsError>)> {
    let params = NetParams::init(data.dim(), cfg.depth, cfg.alpha)?;
    let stepper = cfg.resolved_stepper();
    let k0 = tangent_kernel(&params, data);
    let closed = cfg.metrics.closed_form;
    let (alpha, depth) = (cfg.alpha, cfg.depth);
    let result = run_observed(&params, data, &stepper, |p, rec| {
        if kernel {
            if let Ok(v) = kernel_distance(&tangent_kernel(p, data), &k0) {
                rec.metrics.insert("kernel_distance".into(), v);
            }
        }
        if closed {
            if let Ok(v) = closed_form_residual(rec, alpha, depth) {
                rec.metrics.insert("closed_form_residual".into(), v);
            }
        }
    });
    match result {
        Ok(t) => Ok((t, None)),
        Err(DynamicsError::BudgetExhausted { steps, gamma_tilde, target, partial }) => {
            let err = DynamicsError::BudgetExhausted { steps, gamma_tilde, target, partial: partial.clone() };
            Ok((*partial, Some(err)))
        }
        Err(e) => Err(e.into()),
    }
}

fn write_trajectory(cfg: &RunConfig, command: &str, traj: &Trajectory) -> Result<()> {
    if out_is_json(cfg) {
        return emit_json(cfg, &trajectory_to_json(traj, cfg.to_json(command)));
    }
    let mut out = sink(cfg)?;
    write_trajectory_csv(traj, &cfg.header(command), &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<()> {
    let data = cfg.dataset()?;
    let (traj, err) = simulate_with_metrics(cfg, &data, cfg.metrics.kernel_distance)?;
    write_trajectory(cfg, "simulate", &traj)?;
    if cfg.metrics.condition {
        let report = condition_report(cfg, &data, &traj.records)?;
        say(&serde_json::to_string_pretty(&report)?)?;
    }
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn solve(cfg: &RunConfig) -> Result<()> {
    let data = cfg.dataset()?;
    let sol: MarginSolution = match cfg.solve.objective {
        ObjectiveKind::L2 => l2_max_margin(&data)?,
        ObjectiveKind::L1 => l1_max_margin(&data)?,
        ObjectiveKind::Qmu => {
            let Some(mu) = cfg.mu else { bail!("objective qmu needs --mu") };
            q_mu_max_margin(&data, &PenaltySpec::new(cfg.depth, mu)?)?
        }
        ObjectiveKind::Lq => {
            let start = match &cfg.solve.start {
                Some(s) => s.clone(),
                None => l1_max_margin(&data)?.w,
            };
            lp_quasi_stationary(&data, cfg.depth, &start)?
        }
    };
    say(&sol.to_json())?;
    if cfg.out.is_some() {
        let body = json!({ "config": cfg.to_json("solve"), "solution": sol });
        emit_json(cfg, &serde_json::to_string_pretty(&body)?)?;
    }
    Ok(())
}

pub fn path(cfg: &RunConfig) -> Result<()> {
    let data = cfg.dataset()?;
    let p = cfg.path;
    if p.points < 2 {
        bail!("path needs at least 2 points, got {}", p.points);
    }
    if !(p.mu_max > p.mu_min && p.mu_min > 0.0 && p.mu_max.is_finite()) {
        bail!("path needs mu_max > mu_min > 0, got {} and {}", p.mu_max, p.mu_min);
    }
    let grid = log_grid(p.mu_max, p.mu_min, p.points);
    let sols = q_path(&data, cfg.depth, &grid)?;
    if out_is_json(cfg) {
        let points: Vec<_> = grid.iter().zip(&sols).map(|(mu, s)| json!({ "mu": mu, "solution": s })).collect();
        let body = json!({ "config": cfg.to_json("path"), "path": points });
        return emit_json(cfg, &serde_json::to_string_pretty(&body)?);
    }
    let mut out = sink(cfg)?;
    write_comment_header(&mut out, &cfg.header("path"))?;
    let mut head = vec!["mu".to_string(), "objective".into(), "kkt_max".into()];
    head.extend((0..data.dim()).map(|i| format!("w_{i}")));
    writeln!(out, "{}", head.join(","))?;
    for (mu, s) in grid.iter().zip(&sols) {
        let mut row = vec![fmt_f64(*mu), fmt_f64(s.objective), fmt_f64(s.kkt_residuals.max())];
        row.extend(s.w.iter().map(|&x| fmt_f64(x)));
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// The sweep spec implied by the configuration.
pub fn sweep_spec(cfg: &RunConfig, data: Dataset) -> SweepSpec {
    let s = &cfg.sweep;
    let depths = if s.depths.is_empty() { vec![cfg.depth] } else { s.depths.clone() };
    let alphas = if s.alphas.is_empty() { vec![cfg.alpha] } else { s.alphas.clone() };
    let mut rules: Vec<StoppingRule> = s.gamma_tildes.iter().map(|&g| StoppingRule::fixed(g)).collect();
    rules.extend(s.mus.iter().map(|&m| StoppingRule::mu_scaled(m)));
    if let Some(r) = cfg.rule() {
        rules.push(r);
    }
    SweepSpec {
        dataset: DatasetSource::Inline(data),
        depths,
        alphas,
        rules,
        stepper: cfg.stepper.clone(),
        metrics: MetricSelection { kernel_distance: cfg.metrics.kernel_distance, closed_form: cfg.metrics.closed_form },
        keep_trajectories: s.keep_trajectories,
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let spec = sweep_spec(cfg, cfg.dataset()?);
    if spec.rules.is_empty() {
        bail!("sweep needs a stopping rule (--gamma-tilde, --mu, or sweep.gamma_tildes / sweep.mus)");
    }
    let result = run_sweep(&spec, cfg.workers)?;
    if out_is_json(cfg) {
        return emit_json(cfg, &result.to_json(cfg.to_json("sweep")));
    }
    let mut out = sink(cfg)?;
    result.write_csv(&cfg.header("sweep"), &mut out)?;
    out.flush()?;
    Ok(())
}

fn condition_report(cfg: &RunConfig, data: &Dataset, records: &[TrajectoryRecord]) -> Result<ConditionReport> {
    let Some(last) = records.last() else { bail!("trajectory has no records") };
    let w_hat = match &cfg.condition.w_hat {
        Some(w) => w.clone(),
        None => {
            if !(last.gamma > 0.0) {
                bail!("final iterate does not separate the data (gamma = {}); pass a w_hat", last.gamma);
            }
            last.w_hat()
        }
    };
    let window = cfg.condition.window.unwrap_or_else(|| default_window(cfg.alpha, cfg.depth, last.gamma_tilde));
    Ok(condition1_check_window(records, data, &w_hat, cfg.condition.rho0, window)?)
}

fn read_records(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    if is_json(path) {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(trajectory_from_json(&text)?.1.records);
    }
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_trajectory_csv(f)?)
}

pub fn check_condition(cfg: &RunConfig) -> Result<()> {
    let data = cfg.dataset()?;
    let Some(path) = &cfg.condition.trajectory else { bail!("check-condition needs --trajectory") };
    let records = read_records(path)?;
    let report = condition_report(cfg, &data, &records)?;
    let body = json!({ "config": cfg.to_json("check-condition"), "report": report });
    say(&serde_json::to_string_pretty(&report)?)?;
    if cfg.out.is_some() {
        emit_json(cfg, &serde_json::to_string_pretty(&body)?)?;
    }
    Ok(())
}

pub fn kernel(cfg: &RunConfig) -> Result<()> {
    let data = cfg.dataset()?;
    let (traj, err) = simulate_with_metrics(cfg, &data, true)?;
    let crossings: Vec<_> = cfg
        .kernel
        .thresholds
        .iter()
        .map(|&t| json!({ "threshold": t, "gamma_tilde": first_exceeding(&traj.records, "kernel_distance", t) }))
        .collect();
    let last = traj.last();
    let summary = json!({
        "final_gamma_tilde": last.gamma_tilde,
        "final_kernel_distance": last.metrics.get("kernel_distance"),
        "crossings": crossings,
    });
    if out_is_json(cfg) {
        let mut v: serde_json::Value =
            serde_json::from_str(&trajectory_to_json(&traj, cfg.to_json("kernel-distance")))?;
        v["summary"] = summary.clone();
        emit_json(cfg, &serde_json::to_string_pretty(&v)?)?;
    } else {
        let mut out = sink(cfg)?;
        write_records_csv(&traj.records, &cfg.header("kernel-distance"), &mut out)?;
        out.flush()?;
    }
    if cfg.out.is_some() {
        say(&serde_json::to_string_pretty(&summary)?)?;
    }
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}
