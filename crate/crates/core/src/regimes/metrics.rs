use super::RegimeError;
use crate::data::Dataset;
use crate::dynamics::TrajectoryRecord;
use crate::linalg::{norm1, norm2, scale};

/// `ŵ = w/γ` with `γ = min_n z_nᵀw`; requires `γ > 0`.
pub fn rescale_to_margin(w: &[f64], data: &Dataset) -> Result<Vec<f64>, RegimeError> {
    let gamma = data.margins_of(w).into_iter().fold(f64::INFINITY, f64::min);
    if !(gamma > 0.0) {
        return Err(RegimeError::NotSeparating(gamma));
    }
    Ok(scale(w, 1.0 / gamma))
}

/// `(‖ŵ‖₁/‖w_l1‖₁ − 1, ‖ŵ‖₂/‖w_l2‖₂ − 1)` for the margin-rescaled `ŵ`.
pub fn excess_norms(w: &[f64], data: &Dataset, w_l1: &[f64], w_l2: &[f64]) -> Result<(f64, f64), RegimeError> {
    let (r1, r2) = (norm1(w_l1), norm2(w_l2));
    if r1 == 0.0 || r2 == 0.0 {
        return Err(RegimeError::ZeroVector);
    }
    let w_hat = rescale_to_margin(w, data)?;
    Ok((norm1(&w_hat) / r1 - 1.0, norm2(&w_hat) / r2 - 1.0))
}

/// `(atan2(w₂, w₁), asin(w₃/‖w‖))`, azimuth 0 at the poles.
pub fn sphere_coords(w: &[f64]) -> Result<(f64, f64), RegimeError> {
    if w.len() != 3 {
        return Err(RegimeError::Invalid(format!("sphere coordinates need d = 3, got {}", w.len())));
    }
    let n = norm2(w);
    if n == 0.0 {
        return Err(RegimeError::ZeroVector);
    }
    let pitch = (w[2] / n).clamp(-1.0, 1.0).asin();
    let azimuth = if w[0] == 0.0 && w[1] == 0.0 { 0.0 } else { w[1].atan2(w[0]) };
    Ok((azimuth, pitch))
}

/// γ̃ of the first record whose `key` metric exceeds `threshold`.
pub fn first_exceeding(records: &[TrajectoryRecord], key: &str, threshold: f64) -> Option<f64> {
    records.iter().find(|r| r.metrics.get(key).is_some_and(|&v| v > threshold)).map(|r| r.gamma_tilde)
}
