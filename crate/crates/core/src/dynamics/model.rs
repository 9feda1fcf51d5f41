use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::data::Dataset;

/// Parameters `u = (u₊, u₋)` of a depth-`D` diagonal network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub u_plus: Vec<f64>,
    pub u_minus: Vec<f64>,
    pub depth: u32,
    pub alpha: f64,
}

impl NetParams {
    /// `u₊ = u₋ = α·1`, so `w = 0`.
    pub fn init(dim: usize, depth: u32, alpha: f64) -> Result<Self, DynamicsError> {
        Self::new(vec![alpha; dim], vec![alpha; dim], depth, alpha)
    }

    pub fn new(u_plus: Vec<f64>, u_minus: Vec<f64>, depth: u32, alpha: f64) -> Result<Self, DynamicsError> {
        if depth < 2 {
            return Err(DynamicsError::InvalidParams(format!("depth must be >= 2, got {depth}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(DynamicsError::InvalidParams(format!("alpha must be positive, got {alpha}")));
        }
        if u_plus.len() != u_minus.len() || u_plus.is_empty() {
            return Err(DynamicsError::InvalidParams("u_plus and u_minus must have equal nonzero length".into()));
        }
        if u_plus.iter().chain(&u_minus).any(|&u| !(u >= 0.0 && u.is_finite())) {
            return Err(DynamicsError::InvalidParams("parameters must be finite and nonnegative".into()));
        }
        Ok(NetParams { u_plus, u_minus, depth, alpha })
    }

    pub fn dim(&self) -> usize {
        self.u_plus.len()
    }

    pub fn predictor(&self) -> Vec<f64> {
        predictor(self)
    }
}

/// `w = u₊^D − u₋^D`.
pub fn predictor(params: &NetParams) -> Vec<f64> {
    let d = params.depth as i32;
    params.u_plus.iter().zip(&params.u_minus).map(|(a, b)| a.powi(d) - b.powi(d)).collect()
}

/// Log-domain loss summary at one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginState {
    /// Per-sample margins `γ̄_n = z_nᵀw`.
    pub margins: Vec<f64>,
    /// `min_n γ̄_n`.
    pub gamma: f64,
    /// `−log L`.
    pub gamma_tilde: f64,
    /// `exp(−(γ̄_n − γ))` normalized to sum 1.
    pub p: Vec<f64>,
}

impl MarginState {
    pub fn from_margins(margins: Vec<f64>) -> Self {
        let gamma = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        let shifted: Vec<f64> = margins.iter().map(|m| (-(m - gamma)).exp()).collect();
        let total: f64 = shifted.iter().sum();
        let n = margins.len() as f64;
        let gamma_tilde = gamma - (total / n).ln();
        let p = shifted.iter().map(|s| s / total).collect();
        MarginState { margins, gamma, gamma_tilde, p }
    }
}

pub fn margins(params: &NetParams, data: &Dataset) -> MarginState {
    MarginState::from_margins(data.margins_of(&params.predictor()))
}

/// `X·p = Σ_n p_n z_n`.
pub(crate) fn weighted_sum(data: &Dataset, p: &[f64]) -> Vec<f64> {
    data.combine(p)
}

/// `G = ∇L/L`, laid out as `[G_{u₊}; G_{u₋}]`.
pub fn normalized_direction(params: &NetParams, data: &Dataset) -> Vec<f64> {
    let state = margins(params, data);
    direction_from(params, &weighted_sum(data, &state.p))
}

pub(crate) fn direction_from(params: &NetParams, xp: &[f64]) -> Vec<f64> {
    let dd = f64::from(params.depth);
    let e = params.depth as i32 - 1;
    let plus = params.u_plus.iter().zip(xp).map(|(u, v)| -dd * u.powi(e) * v);
    let minus = params.u_minus.iter().zip(xp).map(|(u, v)| dd * u.powi(e) * v);
    plus.chain(minus).collect()
}

/// `∇_u L` for `L = (1/N) Σ exp(−γ̄_n)`.
///
/// Fails with [`DynamicsError::Underflow`] once the loss is no longer
/// representable; [`normalized_direction`] has no such limit.
pub fn loss_gradient(params: &NetParams, data: &Dataset) -> Result<Vec<f64>, DynamicsError> {
    let m = data.margins_of(&params.predictor());
    let n = m.len() as f64;
    let weights: Vec<f64> = m.iter().map(|g| (-g).exp() / n).collect();
    if weights.iter().all(|&w| w == 0.0) {
        let state = MarginState::from_margins(m);
        return Err(DynamicsError::Underflow { gamma_tilde: state.gamma_tilde });
    }
    Ok(direction_from(params, &data.combine(&weights)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictor_examples() {
        let p = NetParams::init(3, 2, 0.7).unwrap();
        assert_eq!(p.predictor(), vec![0.0; 3]);
        let p = NetParams::new(vec![2.0, 1.0], vec![1.0, 1.0], 2, 1.0).unwrap();
        assert_eq!(p.predictor(), vec![3.0, 0.0]);
        let p = NetParams::new(vec![1.0, 0.0], vec![0.0, 2.0], 3, 1.0).unwrap();
        assert_eq!(p.predictor(), vec![1.0, -8.0]);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(NetParams::init(2, 1, 1.0).is_err());
        assert!(NetParams::init(2, 2, 0.0).is_err());
        assert!(NetParams::new(vec![-1.0], vec![1.0], 2, 1.0).is_err());
    }

    #[test]
    fn margin_state_examples() {
        let s = MarginState::from_margins(vec![0.0, 0.0, 0.0]);
        assert_eq!((s.gamma, s.gamma_tilde), (0.0, 0.0));
        assert!(s.p.iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));

        let s = MarginState::from_margins(vec![5.0]);
        assert_eq!((s.gamma, s.gamma_tilde, s.p.clone()), (5.0, 5.0, vec![1.0]));

        let s = MarginState::from_margins(vec![2.0, 2.0 + 2f64.ln()]);
        assert_eq!(s.gamma, 2.0);
        assert!((s.gamma_tilde - (2.0 + (4.0f64 / 3.0).ln())).abs() < 1e-15);
    }

    #[test]
    fn huge_margins_stay_finite() {
        let s = MarginState::from_margins(vec![1e6, 1e6 + 1.0]);
        assert!(s.gamma_tilde.is_finite() && s.gamma_tilde > 1e6);
        assert!((s.p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let data = Dataset::from_effective(vec![vec![1.0]]).unwrap();
        let p = NetParams::init(1, 2, 1.0).unwrap();
        assert_eq!(loss_gradient(&p, &data).unwrap(), vec![-2.0, 2.0]);
        assert_eq!(normalized_direction(&p, &data), vec![-2.0, 2.0]);

        let p = NetParams::new(vec![0.0, 1.0], vec![1.0, 1.0], 2, 1.0).unwrap();
        let data = Dataset::from_effective(vec![vec![1.0, 1.0]]).unwrap();
        assert_eq!(loss_gradient(&p, &data).unwrap()[0], 0.0);
    }

    #[test]
    fn duplicated_samples_do_not_change_direction() {
        let p = NetParams::new(vec![1.3, 0.4], vec![0.2, 0.9], 3, 1.0).unwrap();
        let one = Dataset::from_effective(vec![vec![1.0, 2.0]]).unwrap();
        let two = Dataset::from_effective(vec![vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        let (a, b) = (normalized_direction(&p, &one), normalized_direction(&p, &two));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn underflow_is_reported() {
        let p = NetParams::new(vec![40.0], vec![0.0], 2, 1.0).unwrap();
        let data = Dataset::from_effective(vec![vec![1.0]]).unwrap();
        assert!(matches!(loss_gradient(&p, &data), Err(DynamicsError::Underflow { .. })));
        assert!(normalized_direction(&p, &data).iter().all(|g| g.is_finite()));
    }
}
