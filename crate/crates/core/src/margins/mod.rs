//! Certified max-margin solvers.
//!
//! Every solver returns a [`MarginSolution`] carrying the primal vector, the
//! dual certificate `ν ≥ 0` (with `∇R(w) ∈ Σ_n ν_n z_n` for the regularizer
//! `R`) and KKT residuals recomputed by [`kkt_check`], which never looks at
//! solver internals.

mod kkt;
mod l1;
mod l2;
pub mod lp;
mod path;
mod qmu;
mod quasi;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::penalty::PenaltySpec;

pub use kkt::kkt_check;
pub use l1::l1_max_margin;
pub use l2::{l2_max_margin, project_onto_margin_set};
pub use path::{log_grid, q_path};
pub use qmu::{q_mu_max_margin, q_mu_max_margin_from};
pub use quasi::{lp_quasi_stationary, QUASI_SMOOTHING};

#[derive(Debug, Error)]
pub enum MarginError {
    #[error("data is not linearly separable")]
    NotSeparable,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("{solver} did not converge after {iterations} iterations")]
    NotConverged { solver: &'static str, iterations: usize },
    #[error("Newton failure in Q_mu solver at t = {t:e}: {reason}")]
    Newton { t: f64, reason: String, last: Vec<f64> },
    #[error("q_path failed at grid index {index} (mu = {mu}): {source}")]
    Path {
        index: usize,
        mu: f64,
        #[source]
        source: Box<MarginError>,
    },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Which regularizer a solution minimizes under `z_nᵀw ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// `½‖w‖²` (duals are scaled for this form; the reported objective is `‖w‖₂`).
    L2,
    L1,
    QMu(PenaltySpec),
    /// `Σ|w_i|^{2/D}`, a quasi-norm for D > 2.
    Lq {
        depth: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniqueHint {
    Unique,
    Degenerate,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    /// Distance of `Σ ν_n z_n` from the (sub)gradient of the regularizer,
    /// relative to `max(1, ‖∇R‖∞)`.
    pub stationarity: f64,
    /// `max(0, 1 − min_n z_nᵀw)`.
    pub primal: f64,
    /// `max_n ν_n·|z_nᵀw − 1|`, relative to `max(1, ‖ν‖∞)`.
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.complementarity)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginSolution {
    pub objective_kind: Objective,
    pub w: Vec<f64>,
    pub objective: f64,
    pub nu: Vec<f64>,
    pub kkt_residuals: KktResiduals,
    pub unique_hint: UniqueHint,
    /// True when the solution only certifies local stationarity.
    pub local: bool,
}

impl MarginSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn direction(&self) -> Vec<f64> {
        let n = crate::linalg::norm2(&self.w);
        crate::linalg::scale(&self.w, 1.0 / n)
    }
}

/// Samples within `tol` of the minimum margin, the support-vector rule used
/// throughout: `z_nᵀw ≤ γ(1 + 1e-6) + 1e-9`.
pub fn support_set(margins: &[f64]) -> Vec<usize> {
    let gamma = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let cut = gamma * (1.0 + 1e-6) + 1e-9;
    margins.iter().enumerate().filter(|(_, &m)| m <= cut).map(|(i, _)| i).collect()
}
