use nalgebra::{DMatrix, DVector};

use super::kkt::residuals;
use super::{MarginError, MarginSolution, Objective, UniqueHint};
use crate::data::Dataset;
use crate::linalg::{dot, norm2};

const MAX_SWEEPS: usize = 2_000_000;

/// `argmin ‖w‖₂ s.t. z_nᵀw ≥ 1`, via the dual QP.
pub fn l2_max_margin(data: &Dataset) -> Result<MarginSolution, MarginError> {
    if !data.is_separable() {
        return Err(MarginError::NotSeparable);
    }
    let (w, nu) = project_onto_margin_set(data, &vec![0.0; data.dim()])?;
    let objective = norm2(&w);
    let kkt_residuals = residuals(&w, &nu, data, &Objective::L2);
    Ok(MarginSolution {
        objective_kind: Objective::L2,
        w,
        objective,
        nu,
        kkt_residuals,
        unique_hint: UniqueHint::Unique,
        local: false,
    })
}

/// Euclidean projection of `v` onto `{w : z_nᵀw ≥ 1 ∀n}`.
///
/// Gauss–Seidel ascent on the dual `w = v + Σ ν_n z_n, ν ≥ 0` until the largest
/// dual update is below 1e-12, then an exact re-solve on the detected active
/// set. Returns `(w, ν)`.
pub fn project_onto_margin_set(data: &Dataset, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>), MarginError> {
    let zs = data.effective_points();
    let sq: Vec<f64> = zs.iter().map(|z| dot(z, z)).collect();
    if sq.contains(&0.0) {
        return Err(MarginError::NotSeparable);
    }
    let mut nu = vec![0.0; zs.len()];
    let mut w = v.to_vec();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut max_change: f64 = 0.0;
        for (n, z) in zs.iter().enumerate() {
            let next = (nu[n] + (1.0 - dot(z, &w)) / sq[n]).max(0.0);
            let delta = next - nu[n];
            if delta != 0.0 {
                for (wi, zi) in w.iter_mut().zip(z) {
                    *wi += delta * zi;
                }
                nu[n] = next;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < 1e-12 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(MarginError::NotConverged { solver: "l2 dual ascent", iterations: MAX_SWEEPS });
    }
    if let Some(polished) = polish(data, v, &nu) {
        return Ok(polished);
    }
    Ok((w, nu))
}

/// Solves the equality-constrained projection on the active set of `nu` and
/// keeps it only if it is primal and dual feasible.
fn polish(data: &Dataset, v: &[f64], nu: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let zs = data.effective_points();
    let active: Vec<usize> = (0..zs.len()).filter(|&n| nu[n] > 0.0).collect();
    if active.is_empty() {
        return None;
    }
    let k = active.len();
    let gram = DMatrix::from_fn(k, k, |i, j| dot(&zs[active[i]], &zs[active[j]]));
    let rhs = DVector::from_fn(k, |i, _| 1.0 - dot(&zs[active[i]], v));
    let sol = gram.clone().cholesky()?.solve(&rhs);
    if sol.iter().any(|&x| x < 0.0) {
        return None;
    }
    let mut nu_p = vec![0.0; zs.len()];
    for (i, &n) in active.iter().enumerate() {
        nu_p[n] = sol[i];
    }
    let w = {
        let mut w = v.to_vec();
        for (z, &a) in zs.iter().zip(&nu_p) {
            for (wi, zi) in w.iter_mut().zip(z) {
                *wi += a * zi;
            }
        }
        w
    };
    let feasible = zs.iter().all(|z| dot(z, &w) >= 1.0 - 1e-12);
    feasible.then_some((w, nu_p))
}
