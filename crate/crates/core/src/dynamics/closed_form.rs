use super::{DynamicsError, TrajectoryRecord};
use crate::penalty::h_d;

/// `‖w − 2α² sinh(s)‖∞` for D = 2, `‖w − α^D h_D(s)‖∞` for D > 2.
pub fn closed_form_residual(record: &TrajectoryRecord, alpha: f64, depth: u32) -> Result<f64, DynamicsError> {
    if record.s_accum.len() != record.w.len() {
        return Err(DynamicsError::ShapeMismatch("record carries no s_accum".into()));
    }
    let mut worst: f64 = 0.0;
    for (i, (&w, &s)) in record.w.iter().zip(&record.s_accum).enumerate() {
        let model = closed_form_w(s, alpha, depth).map_err(|_| DynamicsError::Domain { index: i, value: s })?;
        worst = worst.max((w - model).abs());
    }
    Ok(worst)
}

fn closed_form_w(s: f64, alpha: f64, depth: u32) -> Result<f64, crate::penalty::PenaltyError> {
    if depth == 2 {
        return Ok(2.0 * alpha * alpha * s.sinh());
    }
    Ok(alpha.powi(depth as i32) * h_d(s, depth)?)
}

/// Lower bound on `γ̃` after plain gradient flow time `t`:
/// `log(1 + 2D²α^{2D−2}γ₂²t)`.
pub fn loss_bound_floor(alpha: f64, depth: u32, gamma2: f64, t: f64) -> f64 {
    let d = f64::from(depth);
    (2.0 * d * d * alpha.powf(2.0 * d - 2.0) * gamma2 * gamma2 * t).ln_1p()
}

/// Upper bound on `‖w‖∞` at smoothed margin `γ̃`; `None` when the D > 2
/// bound has left the domain of `h_D` (no finite bound).
pub fn w_inf_ceiling(alpha: f64, depth: u32, xbar: f64, gamma2: f64, gamma_tilde: f64) -> Option<f64> {
    let d = f64::from(depth);
    if depth == 2 {
        let arg = xbar * gamma_tilde / (2.0 * gamma2 * gamma2 * alpha * alpha);
        return Some(2.0 * alpha * alpha * arg.sinh());
    }
    let ad = alpha.powf(d);
    let arg = (d - 2.0) * xbar * gamma_tilde / (2.0 * d * gamma2 * gamma2 * ad);
    h_d(arg, depth).ok().map(|h| ad * h)
}
