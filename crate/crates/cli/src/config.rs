//! Run configuration: TOML file, then command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use diagnet::data::presets;
use diagnet::dynamics::{StepMode, StepperConfig};
use diagnet::regimes::{schedule_target, StoppingRule};
use diagnet::{load_dataset, Dataset};
use serde::{Deserialize, Serialize};

/// Everything a command needs. Unset optional keys are omitted from the
/// echoed header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset file (`.json` or `.csv`) or `preset:<name>`.
    pub data: Option<String>,
    pub depth: u32,
    pub alpha: f64,
    /// Seed for generated presets (`sparse10`, `random10`).
    pub seed: u64,
    /// Stop at this smoothed margin.
    pub gamma_tilde: Option<f64>,
    /// Stop at `γ̃ = α^D/μ`; also the μ of `solve --objective qmu`.
    pub mu: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub stepper: StepperConfig,
    pub metrics: MetricToggles,
    pub solve: SolveConfig,
    pub path: PathConfig,
    pub condition: ConditionConfig,
    pub kernel: KernelConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            depth: 2,
            alpha: 1.0,
            seed: 0,
            gamma_tilde: None,
            mu: None,
            out: None,
            workers: 1,
            stepper: StepperConfig::default(),
            metrics: MetricToggles::default(),
            solve: SolveConfig::default(),
            path: PathConfig::default(),
            condition: ConditionConfig::default(),
            kernel: KernelConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricToggles {
    pub kernel_distance: bool,
    pub closed_form: bool,
    /// Run the stability-condition check on the finished trajectory.
    pub condition: bool,
}

impl Default for MetricToggles {
    fn default() -> Self {
        MetricToggles { kernel_distance: false, closed_form: true, condition: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    #[default]
    L2,
    L1,
    Qmu,
    /// `Σ|w_i|^{2/D}` stationary point (D > 2).
    Lq,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub objective: ObjectiveKind,
    /// Start for `lq`; the ℓ1 solution when unset.
    pub start: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub mu_max: f64,
    pub mu_min: f64,
    pub points: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { mu_max: 1e4, mu_min: 1e-4, points: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionConfig {
    pub rho0: f64,
    /// γ̃ window; `[α^{D/2}, final γ̃]` when unset.
    pub window: Option<(f64, f64)>,
    /// Reference `ŵ`; the final margin-rescaled iterate when unset.
    pub w_hat: Option<Vec<f64>>,
    /// Trajectory file (CSV or JSON) to check.
    pub trajectory: Option<PathBuf>,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        ConditionConfig { rho0: 1.01, window: None, w_hat: None, trajectory: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// Report the first γ̃ at which the distance exceeds each threshold.
    pub thresholds: Vec<f64>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { thresholds: vec![0.1] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Defaults to `[depth]`.
    pub depths: Vec<u32>,
    /// Defaults to `[alpha]`.
    pub alphas: Vec<f64>,
    pub gamma_tildes: Vec<f64>,
    pub mus: Vec<f64>,
    pub keep_trajectories: bool,
}

/// Flags shared by every subcommand; each one overrides its config key.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Dataset file (.json/.csv) or preset:<name>.
    #[arg(long, global = true)]
    pub data: Option<String>,
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<StepMode>,
    #[arg(long = "gamma-tilde", global = true, conflicts_with = "mu")]
    pub gamma_tilde: Option<f64>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

fn parse_mode(s: &str) -> Result<StepMode, String> {
    s.parse()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Config file (if any) with flags applied on top.
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut cfg = match &o.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &o.data {
            cfg.data = Some(v.clone());
        }
        if let Some(v) = o.depth {
            cfg.depth = v;
        }
        if let Some(v) = o.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = o.eta {
            cfg.stepper.eta = v;
        }
        if let Some(v) = o.mode {
            cfg.stepper.mode = v;
        }
        if let Some(v) = o.gamma_tilde {
            cfg.gamma_tilde = Some(v);
            cfg.mu = None;
        }
        if let Some(v) = o.mu {
            cfg.mu = Some(v);
            cfg.gamma_tilde = None;
        }
        if let Some(v) = &o.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = o.seed {
            cfg.seed = v;
        }
        if let Some(v) = o.workers {
            cfg.workers = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 2 {
            bail!("depth must be >= 2, got {}", self.depth);
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            bail!("alpha must be positive, got {}", self.alpha);
        }
        if self.gamma_tilde.is_some() && self.mu.is_some() {
            bail!("set at most one of gamma_tilde and mu");
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0 && mu.is_finite()) {
                bail!("mu must be positive, got {mu}");
            }
        }
        if self.workers == 0 {
            bail!("workers must be >= 1");
        }
        self.stepper.validate()?;
        Ok(())
    }

    pub fn dataset(&self) -> Result<Dataset> {
        let Some(spec) = &self.data else { bail!("no dataset given (use --data or the `data` config key)") };
        resolve_dataset(spec, self.seed)
    }

    /// Stopping rule from `gamma_tilde` / `mu`, if either is set.
    pub fn rule(&self) -> Option<StoppingRule> {
        match (self.gamma_tilde, self.mu) {
            (Some(g), _) => Some(StoppingRule::fixed(g)),
            (None, Some(mu)) => Some(StoppingRule::mu_scaled(mu)),
            _ => None,
        }
    }

    /// Stepper settings with the stopping rule folded into the target.
    pub fn resolved_stepper(&self) -> StepperConfig {
        let mut s = self.stepper.clone();
        if let Some(rule) = self.rule() {
            s.gamma_tilde_target = Some(schedule_target(self.alpha, self.depth, &rule));
        }
        s
    }

    /// The resolved configuration as TOML, used as the output header.
    pub fn header(&self, command: &str) -> String {
        let body = toml::to_string(self).unwrap_or_else(|e| format!("unserializable config: {e}"));
        format!("diagnet {command}\n{}", body.trim_end())
    }

    pub fn to_json(&self, command: &str) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(m) = &mut v {
            m.insert("command".into(), command.into());
        }
        v
    }
}

pub fn resolve_dataset(spec: &str, seed: u64) -> Result<Dataset> {
    if let Some(name) = spec.strip_prefix("preset:") {
        return match name {
            "sparse10" => Ok(presets::sparse10(seed)),
            "random10" => Ok(presets::random10(seed)),
            _ => presets::by_name(name).with_context(|| format!("unknown preset '{name}'")),
        };
    }
    Ok(load_dataset(spec, None)?)
}
