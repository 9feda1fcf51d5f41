//! Stationary points of `min Σ|w_i|^{2/D} s.t. z_nᵀw ≥ 1` for `D > 2`.
//!
//! The objective is concave on each orthant, so only local solutions are
//! available. Iteratively reweighted ℓ1: each step minimizes the linearization
//! `Σ c_i |w_i|` with `c_i = p(|w_i| + δ)^{p−1}`, which is an exact LP and a
//! majorize–minimize step for the smoothed objective. The iteration stops on a
//! fixed point; the final LP duals certify stationarity on the support.

use super::kkt::residuals;
use super::lp::{split_w, weighted_l1_program, LpError};
use super::{project_onto_margin_set, MarginError, MarginSolution, Objective, UniqueHint};
use crate::data::Dataset;
use crate::linalg::norm_inf;

/// Smoothing `δ` in the reweighting `p(|w_i| + δ)^{p−1}`.
pub const QUASI_SMOOTHING: f64 = 1e-8;
const MAX_REWEIGHTS: usize = 500;
const FIXED_POINT_TOL: f64 = 1e-12;

pub fn lp_quasi_stationary(data: &Dataset, depth: u32, w0: &[f64]) -> Result<MarginSolution, MarginError> {
    if depth <= 2 {
        return Err(MarginError::Invalid(format!("quasi-norm needs depth > 2, got {depth}")));
    }
    if w0.len() != data.dim() {
        return Err(MarginError::Invalid(format!("start has dimension {}, data has {}", w0.len(), data.dim())));
    }
    if !data.is_separable() {
        return Err(MarginError::NotSeparable);
    }
    let p = 2.0 / f64::from(depth);
    let d = data.dim();
    let feasible = data.margins_of(w0).iter().all(|&m| m >= 1.0);
    let mut w = if feasible { w0.to_vec() } else { project_onto_margin_set(data, w0)?.0 };
    let mut nu = vec![0.0; data.len()];
    let mut converged = false;
    for _ in 0..MAX_REWEIGHTS {
        let weights: Vec<f64> = w.iter().map(|wi| p * (wi.abs() + QUASI_SMOOTHING).powf(p - 1.0)).collect();
        let sol = weighted_l1_program(data, &weights).solve().map_err(|e| match e {
            LpError::Infeasible => MarginError::NotSeparable,
            LpError::Unbounded => MarginError::Unbounded,
            LpError::IterationLimit => MarginError::NotConverged { solver: "simplex", iterations: 0 },
        })?;
        let next = split_w(&sol.x, d);
        nu = sol.duals;
        let change = w.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = norm_inf(&next).max(1.0);
        w = next;
        if change <= FIXED_POINT_TOL * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(MarginError::NotConverged { solver: "reweighted l1", iterations: MAX_REWEIGHTS });
    }
    let objective = w.iter().map(|wi| wi.abs().powf(p)).sum();
    let kind = Objective::Lq { depth };
    let kkt_residuals = residuals(&w, &nu, data, &kind);
    Ok(MarginSolution {
        objective_kind: kind,
        w,
        objective,
        nu,
        kkt_residuals,
        unique_hint: UniqueHint::Unknown,
        local: true,
    })
}
