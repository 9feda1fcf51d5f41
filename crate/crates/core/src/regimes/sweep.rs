use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{excess_norms, rescale_to_margin, schedule_target, RegimeError, StoppingRule};
use crate::data::{load_dataset, presets, Dataset};
use crate::dynamics::{
    closed_form_residual, kernel_distance, run_observed, tangent_kernel, DynamicsError, NetParams, StepperConfig,
    Trajectory,
};
use crate::io::{fmt_f64, write_comment_header};
use crate::linalg::{angle_deg, norm2, scale};
use crate::margins::{l1_max_margin, l2_max_margin, lp_quasi_stationary, q_mu_max_margin};
use crate::penalty::PenaltySpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Path(PathBuf),
    Preset(String),
    Inline(Dataset),
}

impl DatasetSource {
    pub fn load(&self) -> Result<Dataset, RegimeError> {
        match self {
            DatasetSource::Path(p) => Ok(load_dataset(p, None)?),
            DatasetSource::Preset(name) => {
                presets::by_name(name).ok_or_else(|| RegimeError::Invalid(format!("unknown preset '{name}'")))
            }
            DatasetSource::Inline(d) => Ok(d.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSelection {
    /// Tangent-kernel drift from initialization at every record.
    pub kernel_distance: bool,
    /// Largest closed-form residual over the run.
    pub closed_form: bool,
}

impl Default for MetricSelection {
    fn default() -> Self {
        MetricSelection { kernel_distance: false, closed_form: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub dataset: DatasetSource,
    pub depths: Vec<u32>,
    pub alphas: Vec<f64>,
    pub rules: Vec<StoppingRule>,
    #[serde(default)]
    pub stepper: StepperConfig,
    #[serde(default)]
    pub metrics: MetricSelection,
    /// Keep full trajectories in the result.
    #[serde(default)]
    pub keep_trajectories: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), RegimeError> {
        if self.depths.is_empty() || self.alphas.is_empty() || self.rules.is_empty() {
            return Err(RegimeError::Invalid("depths, alphas and rules must be nonempty".into()));
        }
        if let Some(&d) = self.depths.iter().find(|&&d| d < 2) {
            return Err(RegimeError::Invalid(format!("depth must be >= 2, got {d}")));
        }
        if let Some(&a) = self.alphas.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
            return Err(RegimeError::Invalid(format!("alpha must be positive, got {a}")));
        }
        for r in &self.rules {
            r.validate()?;
        }
        self.stepper.validate()?;
        Ok(())
    }

    /// Cells in key order `(D, α, rule)`.
    pub fn cells(&self) -> Vec<(u32, f64, StoppingRule)> {
        let mut out = Vec::new();
        for &d in &self.depths {
            for &a in &self.alphas {
                for &r in &self.rules {
                    out.push((d, a, r));
                }
            }
        }
        out
    }
}

/// Outcome of one `(D, α, rule)` cell. Metric fields are `None` when not
/// requested or not defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub depth: u32,
    pub alpha: f64,
    pub rule: StoppingRule,
    pub gamma_tilde_target: f64,
    pub error: Option<String>,
    pub steps: Option<u64>,
    pub gamma: Option<f64>,
    pub gamma_tilde: Option<f64>,
    /// Final predictor rescaled to unit ℓ2 norm.
    pub direction: Option<Vec<f64>>,
    pub excess_l1: Option<f64>,
    pub excess_l2: Option<f64>,
    pub angle_l1: Option<f64>,
    pub angle_l2: Option<f64>,
    /// Angle to the `Q^D_μ` solution for μ-scaled rules.
    pub angle_qmu: Option<f64>,
    /// Angle to an ℓ_{2/D} stationary point started from the ℓ1 solution (D > 2).
    pub angle_lq: Option<f64>,
    pub kernel_distance: Option<f64>,
    pub closed_form_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub cells: Vec<SweepCell>,
}

struct References {
    l1: Vec<f64>,
    l2: Vec<f64>,
    qmu: BTreeMap<(u32, u64), Result<Vec<f64>, String>>,
    lq: BTreeMap<u32, Result<Vec<f64>, String>>,
}

fn references(data: &Dataset, spec: &SweepSpec) -> Result<References, RegimeError> {
    let l1 = l1_max_margin(data)?.w;
    let l2 = l2_max_margin(data)?.w;
    let mut qmu = BTreeMap::new();
    let mut lq = BTreeMap::new();
    for &d in &spec.depths {
        for mu in spec.rules.iter().filter_map(|r| r.mu()) {
            let sol = PenaltySpec::new(d, mu)
                .map_err(|e| e.to_string())
                .and_then(|p| q_mu_max_margin(data, &p).map(|s| s.w).map_err(|e| e.to_string()));
            qmu.insert((d, mu.to_bits()), sol);
        }
        if d > 2 {
            lq.insert(d, lp_quasi_stationary(data, d, &l1).map(|s| s.w).map_err(|e| e.to_string()));
        }
    }
    Ok(References { l1, l2, qmu, lq })
}

/// Runs every cell on a pool of `workers` threads; the result is in key order
/// and independent of `workers`.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult, RegimeError> {
    spec.validate()?;
    let data = spec.dataset.load()?;
    if !data.is_separable() {
        return Err(RegimeError::Dynamics(DynamicsError::NotSeparable));
    }
    let refs = references(&data, spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RegimeError::Invalid(e.to_string()))?;
    let cells = spec.cells();
    let out =
        pool.install(|| cells.par_iter().map(|&(d, a, r)| run_cell(&data, spec, &refs, d, a, r)).collect::<Vec<_>>());
    Ok(SweepResult { spec: spec.clone(), cells: out })
}

fn empty_cell(depth: u32, alpha: f64, rule: StoppingRule, target: f64) -> SweepCell {
    SweepCell {
        depth,
        alpha,
        rule,
        gamma_tilde_target: target,
        error: None,
        steps: None,
        gamma: None,
        gamma_tilde: None,
        direction: None,
        excess_l1: None,
        excess_l2: None,
        angle_l1: None,
        angle_l2: None,
        angle_qmu: None,
        angle_lq: None,
        kernel_distance: None,
        closed_form_residual: None,
        trajectory: None,
    }
}

/// Runs one cell exactly as a direct `run_observed` call would.
pub fn simulate_cell(
    data: &Dataset,
    stepper: &StepperConfig,
    metrics: &MetricSelection,
    depth: u32,
    alpha: f64,
    target: f64,
) -> Result<Trajectory, DynamicsError> {
    let params = NetParams::init(data.dim(), depth, alpha)?;
    let cfg = StepperConfig { gamma_tilde_target: Some(target), ..stepper.clone() };
    let k0 = tangent_kernel(&params, data);
    let want_kernel = metrics.kernel_distance;
    let want_cf = metrics.closed_form;
    run_observed(&params, data, &cfg, |p, rec| {
        if want_kernel {
            if let Ok(v) = kernel_distance(&tangent_kernel(p, data), &k0) {
                rec.metrics.insert("kernel_distance".into(), v);
            }
        }
        if want_cf {
            if let Ok(v) = closed_form_residual(rec, alpha, depth) {
                rec.metrics.insert("closed_form_residual".into(), v);
            }
        }
    })
}

fn run_cell(
    data: &Dataset,
    spec: &SweepSpec,
    refs: &References,
    depth: u32,
    alpha: f64,
    rule: StoppingRule,
) -> SweepCell {
    let target = schedule_target(alpha, depth, &rule);
    let mut cell = empty_cell(depth, alpha, rule, target);
    let traj = match simulate_cell(data, &spec.stepper, &spec.metrics, depth, alpha, target) {
        Ok(t) => t,
        Err(e) => {
            cell.error = Some(e.to_string());
            if let DynamicsError::BudgetExhausted { partial, .. } = e {
                if spec.keep_trajectories {
                    cell.trajectory = Some(*partial);
                }
            }
            return cell;
        }
    };
    let last = traj.last();
    cell.steps = Some(last.step);
    cell.gamma = Some(last.gamma);
    cell.gamma_tilde = Some(last.gamma_tilde);
    let n = norm2(&last.w);
    if n > 0.0 {
        cell.direction = Some(scale(&last.w, 1.0 / n));
    }
    if rescale_to_margin(&last.w, data).is_ok() {
        if let Ok((e1, e2)) = excess_norms(&last.w, data, &refs.l1, &refs.l2) {
            cell.excess_l1 = Some(e1);
            cell.excess_l2 = Some(e2);
        }
    }
    let finite = |x: f64| x.is_finite().then_some(x);
    cell.angle_l1 = finite(angle_deg(&last.w, &refs.l1));
    cell.angle_l2 = finite(angle_deg(&last.w, &refs.l2));
    if let Some(mu) = rule.mu() {
        if let Some(Ok(q)) = refs.qmu.get(&(depth, mu.to_bits())) {
            cell.angle_qmu = finite(angle_deg(&last.w, q));
        }
    }
    if let Some(Ok(q)) = refs.lq.get(&depth) {
        cell.angle_lq = finite(angle_deg(&last.w, q));
    }
    cell.kernel_distance = last.metrics.get("kernel_distance").copied();
    cell.closed_form_residual =
        traj.records.iter().filter_map(|r| r.metrics.get("closed_form_residual").copied()).reduce(f64::max);
    if spec.keep_trajectories {
        cell.trajectory = Some(traj);
    }
    cell
}

const CSV_COLUMNS: [&str; 17] = [
    "depth",
    "alpha",
    "rule",
    "rule_value",
    "gamma_tilde_target",
    "steps",
    "gamma",
    "gamma_tilde",
    "excess_l1",
    "excess_l2",
    "angle_l1",
    "angle_l2",
    "angle_qmu",
    "angle_lq",
    "kernel_distance",
    "closed_form_residual",
    "error",
];

impl SweepResult {
    /// One row per cell; direction components follow as `dir_0..dir_{d−1}`.
    pub fn write_csv<W: Write>(&self, header: &str, mut out: W) -> Result<(), RegimeError> {
        write_comment_header(&mut out, header)?;
        let d = self.cells.iter().find_map(|c| c.direction.as_ref().map(Vec::len)).unwrap_or(0);
        let mut wtr = csv::Writer::from_writer(out);
        let mut head: Vec<String> = CSV_COLUMNS.iter().map(|s| s.to_string()).collect();
        head.extend((0..d).map(|i| format!("dir_{i}")));
        wtr.write_record(&head)?;
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        for c in &self.cells {
            let kind =
                serde_json::to_value(c.rule.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            let mut row = vec![
                c.depth.to_string(),
                fmt_f64(c.alpha),
                kind,
                fmt_f64(c.rule.value),
                fmt_f64(c.gamma_tilde_target),
                c.steps.map(|s| s.to_string()).unwrap_or_default(),
                opt(c.gamma),
                opt(c.gamma_tilde),
                opt(c.excess_l1),
                opt(c.excess_l2),
                opt(c.angle_l1),
                opt(c.angle_l2),
                opt(c.angle_qmu),
                opt(c.angle_lq),
                opt(c.kernel_distance),
                opt(c.closed_form_residual),
                c.error.clone().unwrap_or_default(),
            ];
            match &c.direction {
                Some(dir) => row.extend(dir.iter().map(|&x| fmt_f64(x))),
                None => row.extend(std::iter::repeat_n(String::new(), d)),
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self, config: serde_json::Value) -> String {
        let body = serde_json::json!({ "config": config, "result": self });
        serde_json::to_string_pretty(&body).expect("sweep result serializes")
    }
}
