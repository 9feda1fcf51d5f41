use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::model::{direction_from, weighted_sum, MarginState};
use super::{DynamicsError, NetParams};
use crate::data::Dataset;
use crate::linalg::log_add_exp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    /// `u ← u − η∇L`.
    Plain,
    /// `u ← u − η∇L/L`.
    #[default]
    Normalized,
}

impl FromStr for StepMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" | "plain_gd" => Ok(StepMode::Plain),
            "normalized" | "normalized_gd" => Ok(StepMode::Normalized),
            other => Err(format!("unknown mode '{other}' (expected plain or normalized)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperConfig {
    pub eta: f64,
    pub mode: StepMode,
    pub max_steps: u64,
    /// Keep every `record_every`-th step (the first and last are always kept).
    pub record_every: u64,
    pub gamma_tilde_target: Option<f64>,
    /// Factor applied to η after a rejected step.
    pub step_shrink: f64,
    pub max_retries: u32,
    /// Caps the step so that no parameter changes by more than this fraction
    /// of itself: `η_k = min(η, r / max_i |G_i|/u_i)`.
    pub max_relative_change: Option<f64>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            eta: 1e-4,
            mode: StepMode::Normalized,
            max_steps: 10_000_000,
            record_every: 1,
            gamma_tilde_target: None,
            step_shrink: 0.5,
            max_retries: 60,
            max_relative_change: None,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: String| Err(DynamicsError::InvalidConfig(m));
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return bad(format!("step_shrink must lie in (0, 1), got {}", self.step_shrink));
        }
        if self.record_every == 0 {
            return bad("record_every must be >= 1".into());
        }
        if let Some(t) = self.gamma_tilde_target {
            if !t.is_finite() {
                return bad(format!("gamma_tilde_target must be finite, got {t}"));
            }
        }
        if let Some(r) = self.max_relative_change {
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("max_relative_change must be positive, got {r}"));
            }
        }
        Ok(())
    }
}

/// Snapshot of one iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: u64,
    /// `ln t` of the gradient-flow time reached (−∞ at `t = 0`).
    #[serde(with = "super::serde_float::scalar")]
    pub log_flow_time: f64,
    pub gamma: f64,
    pub gamma_tilde: f64,
    pub w: Vec<f64>,
    /// `c_D · X ∫ r dt`, the argument of the closed-form solution.
    pub s_accum: Vec<f64>,
    #[serde(default, with = "super::serde_float::map")]
    pub metrics: BTreeMap<String, f64>,
}

impl TrajectoryRecord {
    pub fn flow_time(&self) -> f64 {
        self.log_flow_time.exp()
    }

    /// Margin-rescaled predictor `w/γ`.
    pub fn w_hat(&self) -> Vec<f64> {
        crate::linalg::scale(&self.w, 1.0 / self.gamma)
    }
}

/// A recorded run. Records are in step order; the last record is the final
/// iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub final_params: NetParams,
    pub reached_target: bool,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryRecord {
        self.records.last().expect("trajectory has at least one record")
    }
}

/// Running state between steps.
struct Cursor {
    params: NetParams,
    state: MarginState,
    w: Vec<f64>,
    s_accum: Vec<f64>,
    log_flow_time: f64,
    step: u64,
}

impl Cursor {
    fn start(params: NetParams, data: &Dataset) -> Self {
        let w = params.predictor();
        let state = MarginState::from_margins(data.margins_of(&w));
        let d = params.dim();
        Cursor { params, state, w, s_accum: vec![0.0; d], log_flow_time: f64::NEG_INFINITY, step: 0 }
    }

    fn from_record(params: &NetParams, data: &Dataset, rec: &TrajectoryRecord) -> Self {
        let mut c = Cursor::start(params.clone(), data);
        if rec.s_accum.len() == c.s_accum.len() {
            c.s_accum = rec.s_accum.clone();
        }
        c.log_flow_time = rec.log_flow_time;
        c.step = rec.step;
        c
    }

    fn record(&self) -> TrajectoryRecord {
        TrajectoryRecord {
            step: self.step,
            log_flow_time: self.log_flow_time,
            gamma: self.state.gamma,
            gamma_tilde: self.state.gamma_tilde,
            w: self.w.clone(),
            s_accum: self.s_accum.clone(),
            metrics: BTreeMap::new(),
        }
    }
}

/// Direction and step bookkeeping for one update from a fixed iterate.
struct Proposal {
    xp: Vec<f64>,
    g: Vec<f64>,
    /// Multiplier of `G` before retries.
    eta0: f64,
}

fn propose(cur: &Cursor, data: &Dataset, cfg: &StepperConfig) -> Result<Proposal, DynamicsError> {
    let xp = weighted_sum(data, &cur.state.p);
    let g = direction_from(&cur.params, &xp);
    let mut eta0 = match cfg.mode {
        StepMode::Normalized => cfg.eta,
        StepMode::Plain => {
            let loss = (-cur.state.gamma_tilde).exp();
            if loss == 0.0 {
                return Err(DynamicsError::Underflow { gamma_tilde: cur.state.gamma_tilde });
            }
            cfg.eta * loss
        }
    };
    if let Some(r) = cfg.max_relative_change {
        let u = cur.params.u_plus.iter().chain(&cur.params.u_minus);
        let ratio = u.zip(&g).filter(|(u, _)| **u > 0.0).map(|(u, gi)| gi.abs() / u).fold(0.0, f64::max);
        if ratio > 0.0 {
            eta0 = eta0.min(r / ratio);
        }
    }
    Ok(Proposal { xp, g, eta0 })
}

/// Parameters and margins after `u − η·G`, or `None` if some entry goes negative.
fn trial(cur: &Cursor, data: &Dataset, prop: &Proposal, eta: f64) -> Option<Iterate> {
    let d = cur.params.dim();
    let mut next = cur.params.clone();
    for i in 0..d {
        next.u_plus[i] -= eta * prop.g[i];
        next.u_minus[i] -= eta * prop.g[d + i];
    }
    if next.u_plus.iter().chain(&next.u_minus).any(|&u| u < 0.0 || !u.is_finite()) {
        return None;
    }
    let w = next.predictor();
    let state = MarginState::from_margins(data.margins_of(&w));
    state.gamma_tilde.is_finite().then_some((next, w, state))
}

fn c_depth(params: &NetParams) -> f64 {
    let d = f64::from(params.depth);
    if params.depth == 2 {
        4.0
    } else {
        params.alpha.powf(d - 2.0) * d * (d - 2.0)
    }
}

fn commit(cur: &mut Cursor, prop: &Proposal, eta: f64, next: Iterate) {
    let c = c_depth(&cur.params);
    for (s, v) in cur.s_accum.iter_mut().zip(&prop.xp) {
        *s += c * eta * v;
    }
    // dt = η_eff / L for both modes.
    cur.log_flow_time = log_add_exp(cur.log_flow_time, eta.ln() + cur.state.gamma_tilde);
    cur.step += 1;
    (cur.params, cur.w, cur.state) = next;
}

/// One accepted update; rejected proposals are retried with `η·step_shrink`.
fn advance(cur: &mut Cursor, data: &Dataset, cfg: &StepperConfig) -> Result<(Proposal, f64), DynamicsError> {
    let prop = propose(cur, data, cfg)?;
    let mut eta = prop.eta0;
    for _ in 0..=cfg.max_retries {
        if let Some(next) = trial(cur, data, &prop, eta) {
            if next.2.gamma_tilde >= cur.state.gamma_tilde {
                commit(cur, &prop, eta, next);
                return Ok((prop, eta));
            }
        }
        eta *= cfg.step_shrink;
    }
    Err(DynamicsError::StepUnderflow { step: cur.step, eta })
}

/// Single update from `params`, continuing the bookkeeping of `prev`.
pub fn step(
    params: &NetParams,
    data: &Dataset,
    cfg: &StepperConfig,
    prev: &TrajectoryRecord,
) -> Result<(NetParams, TrajectoryRecord), DynamicsError> {
    cfg.validate()?;
    if !data.is_separable() {
        return Err(DynamicsError::NotSeparable);
    }
    check_shape(params, data)?;
    let mut cur = Cursor::from_record(params, data, prev);
    advance(&mut cur, data, cfg)?;
    let rec = cur.record();
    Ok((cur.params, rec))
}

fn check_shape(params: &NetParams, data: &Dataset) -> Result<(), DynamicsError> {
    if params.dim() != data.dim() {
        return Err(DynamicsError::ShapeMismatch(format!(
            "parameters have dimension {}, data has {}",
            params.dim(),
            data.dim()
        )));
    }
    Ok(())
}

pub fn run(params0: &NetParams, data: &Dataset, cfg: &StepperConfig) -> Result<Trajectory, DynamicsError> {
    run_observed(params0, data, cfg, |_, _| {})
}

/// [`run`], calling `observer` on every kept record so it can fill `metrics`.
pub fn run_observed<F>(
    params0: &NetParams,
    data: &Dataset,
    cfg: &StepperConfig,
    mut observer: F,
) -> Result<Trajectory, DynamicsError>
where
    F: FnMut(&NetParams, &mut TrajectoryRecord),
{
    cfg.validate()?;
    if !data.is_separable() {
        return Err(DynamicsError::NotSeparable);
    }
    check_shape(params0, data)?;
    let mut cur = Cursor::start(params0.clone(), data);
    let mut records = Vec::new();
    let mut keep = |cur: &Cursor, records: &mut Vec<TrajectoryRecord>| {
        let mut rec = cur.record();
        observer(&cur.params, &mut rec);
        records.push(rec);
    };
    keep(&cur, &mut records);
    let target = cfg.gamma_tilde_target;
    if target.is_some_and(|t| cur.state.gamma_tilde >= t) {
        return Ok(Trajectory { records, final_params: cur.params, reached_target: true });
    }
    while cur.step < cfg.max_steps {
        let before = snapshot(&cur);
        let (prop, eta) = advance(&mut cur, data, cfg)?;
        if let Some(t) = target {
            if cur.state.gamma_tilde >= t {
                let tol = 1e-6 * t.abs().max(1.0);
                if cur.state.gamma_tilde - t > tol {
                    land_on_target(&mut cur, before, data, &prop, eta, t, tol);
                }
                keep(&cur, &mut records);
                return Ok(Trajectory { records, final_params: cur.params, reached_target: true });
            }
        }
        if cur.step.is_multiple_of(cfg.record_every) {
            keep(&cur, &mut records);
        }
    }
    if records.last().map(|r| r.step) != Some(cur.step) {
        keep(&cur, &mut records);
    }
    let trajectory = Trajectory { records, final_params: cur.params, reached_target: false };
    match target {
        Some(t) => Err(DynamicsError::BudgetExhausted {
            steps: cur.step,
            gamma_tilde: cur.state.gamma_tilde,
            target: t,
            partial: Box::new(trajectory),
        }),
        None => Ok(trajectory),
    }
}

fn snapshot(cur: &Cursor) -> Cursor {
    Cursor {
        params: cur.params.clone(),
        state: cur.state.clone(),
        w: cur.w.clone(),
        s_accum: cur.s_accum.clone(),
        log_flow_time: cur.log_flow_time,
        step: cur.step,
    }
}

/// Candidate iterate: parameters, predictor and margins.
type Iterate = (NetParams, Vec<f64>, MarginState);

/// Replaces the overshooting last step by one whose η is bisected so that
/// `|γ̃ − target| ≤ tol`.
fn land_on_target(cur: &mut Cursor, before: Cursor, data: &Dataset, prop: &Proposal, eta: f64, target: f64, tol: f64) {
    let (mut lo, mut hi) = (0.0, eta);
    let mut best: Option<(f64, Iterate)> = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let Some(next) = trial(&before, data, prop, mid) else {
            hi = mid;
            continue;
        };
        let gt = next.2.gamma_tilde;
        if (gt - target).abs() <= tol {
            best = Some((mid, next));
            break;
        }
        if gt < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if let Some((mid, next)) = best {
        *cur = before;
        commit(cur, prop, mid, next);
    }
}
