use super::model::MarginState;
use super::DynamicsError;
use crate::data::Dataset;

fn kernel_scale(alpha: f64, depth: u32) -> f64 {
    let d = f64::from(depth);
    2.0 * d * d * alpha.powf(2.0 * d - 2.0)
}

/// Euler step of `dw̄/dt = (2/N) D² α^{2D−2} Σ_n exp(−z_nᵀw̄) z_n`.
pub fn linearized_flow_step(w_bar: &[f64], data: &Dataset, alpha: f64, depth: u32, eta: f64) -> Vec<f64> {
    let n = data.len() as f64;
    let weights: Vec<f64> = data.margins_of(w_bar).iter().map(|m| (-m).exp() / n).collect();
    let drift = data.combine(&weights);
    let c = kernel_scale(alpha, depth);
    w_bar.iter().zip(&drift).map(|(w, v)| w + eta * c * v).collect()
}

/// The same step divided by the linearized loss `L̄`, stable at any margin.
pub fn linearized_normalized_step(w_bar: &[f64], data: &Dataset, alpha: f64, depth: u32, eta: f64) -> Vec<f64> {
    let state = MarginState::from_margins(data.margins_of(w_bar));
    let drift = data.combine(&state.p);
    let c = kernel_scale(alpha, depth);
    w_bar.iter().zip(&drift).map(|(w, v)| w + eta * c * v).collect()
}

/// Runs the normalized linearized flow from `w̄ = 0` until `γ̃ ≥ target`;
/// returns `(γ̃, w̄)` at every step.
pub fn linearized_run(
    data: &Dataset,
    alpha: f64,
    depth: u32,
    eta: f64,
    target: f64,
    max_steps: u64,
) -> Result<Vec<(f64, Vec<f64>)>, DynamicsError> {
    let mut w = vec![0.0; data.dim()];
    let mut gt = MarginState::from_margins(data.margins_of(&w)).gamma_tilde;
    let mut out = vec![(gt, w.clone())];
    for _ in 0..max_steps {
        if gt >= target {
            return Ok(out);
        }
        w = linearized_normalized_step(&w, data, alpha, depth, eta);
        gt = MarginState::from_margins(data.margins_of(&w)).gamma_tilde;
        out.push((gt, w.clone()));
    }
    if gt >= target {
        return Ok(out);
    }
    Err(DynamicsError::InvalidConfig(format!(
        "linearized flow reached gamma_tilde {gt} < {target} in {max_steps} steps"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::angle_deg;

    #[test]
    fn first_step_points_at_the_mean() {
        let data = Dataset::from_effective(vec![vec![1.0, 0.0, 2.0], vec![3.0, 1.0, 0.0]]).unwrap();
        let w = linearized_flow_step(&[0.0; 3], &data, 1.0, 2, 0.1);
        assert!(angle_deg(&w, &[2.0, 0.5, 1.0]) < 1e-6);
    }

    #[test]
    fn single_point_grows() {
        let data = Dataset::from_effective(vec![vec![1.0]]).unwrap();
        let mut w = vec![0.0];
        for _ in 0..100 {
            let next = linearized_flow_step(&w, &data, 0.5, 3, 0.1);
            assert!(next[0] > w[0]);
            w = next;
        }
    }
}
