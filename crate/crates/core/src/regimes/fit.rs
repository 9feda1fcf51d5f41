use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::excess_norms;
use super::RegimeError;
use crate::data::Dataset;
use crate::dynamics::TrajectoryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Ordinary least squares `y ≈ a·x + b`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit, RegimeError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(RegimeError::Insufficient(format!("need >= 2 paired points, got {}", xs.len().min(ys.len()))));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(RegimeError::Insufficient("all x values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(LineFit { slope, intercept, residual: (ss / n).sqrt() })
}

/// Per-depth fit of `log γ̃` against `log α^D` from `(α, D, γ̃)` triples.
pub fn accuracy_vs_init_fit(points: &[(f64, u32, f64)]) -> Result<BTreeMap<u32, LineFit>, RegimeError> {
    let mut by_depth: BTreeMap<u32, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for &(alpha, depth, gt) in points {
        if !(alpha > 0.0 && gt > 0.0) {
            return Err(RegimeError::Invalid(format!("alpha and gamma_tilde must be positive ({alpha}, {gt})")));
        }
        let e = by_depth.entry(depth).or_default();
        e.0.push(f64::from(depth) * alpha.ln());
        e.1.push(gt.ln());
    }
    if by_depth.is_empty() {
        return Err(RegimeError::Insufficient("no points".into()));
    }
    by_depth.into_iter().map(|(d, (x, y))| Ok((d, linear_fit(&x, &y)?))).collect()
}

/// Smallest recorded γ̃ at which the excess ℓ1 norm is at most `threshold`.
pub fn gamma_tilde_at_threshold(
    records: &[TrajectoryRecord],
    data: &Dataset,
    w_l1: &[f64],
    w_l2: &[f64],
    threshold: f64,
) -> Option<f64> {
    records
        .iter()
        .filter(|r| r.gamma > 0.0)
        .find(|r| excess_norms(&r.w, data, w_l1, w_l2).is_ok_and(|(e1, _)| e1 <= threshold))
        .map(|r| r.gamma_tilde)
}
