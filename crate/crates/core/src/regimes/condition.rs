use serde::{Deserialize, Serialize};

use super::RegimeError;
use crate::data::Dataset;
use crate::dynamics::TrajectoryRecord;

/// Samples with `z_kᵀŵ` above `1 + NONSUPPORT_SLACK` are non-support.
const NONSUPPORT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub rho0: f64,
    pub gamma_tilde_star: f64,
    pub window: (f64, f64),
    /// `(k, min over the window of z_kᵀw/γ)` for every non-support sample `k`.
    pub per_nonsupport_sample: Vec<(usize, f64)>,
    pub holds: bool,
}

impl ConditionReport {
    /// Smallest ratio over all non-support samples (`+∞` when there are none).
    pub fn min_ratio(&self) -> f64 {
        self.per_nonsupport_sample.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }
}

/// Default window `[α^{D/2}, target]`.
pub fn default_window(alpha: f64, depth: u32, target: f64) -> (f64, f64) {
    (alpha.powf(f64::from(depth) / 2.0), target)
}

/// Checks the stability condition over `[gamma_tilde_star, final γ̃]`.
pub fn condition1_check(
    records: &[TrajectoryRecord],
    data: &Dataset,
    w_hat: &[f64],
    rho0: f64,
    gamma_tilde_star: f64,
) -> Result<ConditionReport, RegimeError> {
    let hi = records.last().map_or(f64::NAN, |r| r.gamma_tilde);
    condition1_check_window(records, data, w_hat, rho0, (gamma_tilde_star, hi))
}

pub fn condition1_check_window(
    records: &[TrajectoryRecord],
    data: &Dataset,
    w_hat: &[f64],
    rho0: f64,
    window: (f64, f64),
) -> Result<ConditionReport, RegimeError> {
    if !(rho0 > 1.0) {
        return Err(RegimeError::Invalid(format!("rho0 must exceed 1, got {rho0}")));
    }
    let (lo, hi) = window;
    if !(lo <= hi) {
        return Err(RegimeError::Invalid(format!("empty window [{lo}, {hi}]")));
    }
    let (first, last) = match (records.first(), records.last()) {
        (Some(a), Some(b)) => (a.gamma_tilde, b.gamma_tilde),
        _ => return Err(RegimeError::NotCovered { lo, hi, first: f64::NAN, last: f64::NAN }),
    };
    let tol = |x: f64| 1e-6 * x.abs().max(1.0);
    if first > lo + tol(lo) || last < hi - tol(hi) {
        return Err(RegimeError::NotCovered { lo, hi, first, last });
    }
    let inside: Vec<&TrajectoryRecord> =
        records.iter().filter(|r| r.gamma_tilde >= lo - tol(lo) && r.gamma_tilde <= hi + tol(hi)).collect();
    if inside.is_empty() {
        return Err(RegimeError::NotCovered { lo, hi, first, last });
    }
    let zs = data.effective_points();
    let mut per = Vec::new();
    for (k, z) in zs.iter().enumerate() {
        let m: f64 = z.iter().zip(w_hat).map(|(a, b)| a * b).sum();
        if m <= 1.0 + NONSUPPORT_SLACK {
            continue;
        }
        let worst = inside
            .iter()
            .map(|r| {
                if r.gamma > 0.0 {
                    z.iter().zip(&r.w).map(|(a, b)| a * b).sum::<f64>() / r.gamma
                } else {
                    f64::NEG_INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min);
        per.push((k, worst));
    }
    let holds = per.iter().all(|&(_, v)| v >= rho0);
    Ok(ConditionReport { rho0, gamma_tilde_star: lo, window, per_nonsupport_sample: per, holds })
}
