use super::kkt::residuals;
use super::lp::{split_w, weighted_l1_program, LinearProgram, LpError};
use super::{MarginError, MarginSolution, Objective, UniqueHint};
use crate::data::Dataset;
use crate::linalg::norm1;

/// Optimal-objective slack allowed when probing for alternative optima.
const FACE_SLACK: f64 = 1e-9;
/// Coordinate spread on the optimal face above which the optimum is not unique.
const SPREAD_TOL: f64 = 1e-6;

/// `argmin ‖w‖₁ s.t. z_nᵀw ≥ 1`, an exact vertex of the split LP.
///
/// Uniqueness is probed by re-solving over the optimal face
/// `{feasible w : ‖w‖₁ ≤ opt + 1e-9}` and minimizing/maximizing each
/// coordinate; a spread above 1e-6 marks the solution `Degenerate`.
pub fn l1_max_margin(data: &Dataset) -> Result<MarginSolution, MarginError> {
    let d = data.dim();
    let lp = weighted_l1_program(data, &vec![1.0; d]);
    let sol = lp.solve().map_err(|e| match e {
        LpError::Infeasible => MarginError::NotSeparable,
        LpError::Unbounded => MarginError::Unbounded,
        LpError::IterationLimit => MarginError::NotConverged { solver: "simplex", iterations: 0 },
    })?;
    let w = split_w(&sol.x, d);
    let nu = sol.duals.clone();
    let objective = norm1(&w);
    let unique_hint =
        if optimal_face_is_point(&lp, objective, d) { UniqueHint::Unique } else { UniqueHint::Degenerate };
    let kkt_residuals = residuals(&w, &nu, data, &Objective::L1);
    Ok(MarginSolution { objective_kind: Objective::L1, w, objective, nu, kkt_residuals, unique_hint, local: false })
}

fn optimal_face_is_point(lp: &LinearProgram, opt: f64, d: usize) -> bool {
    let ncols = lp.c.len();
    let mut face = lp.clone();
    for row in face.a.iter_mut() {
        row.push(0.0);
    }
    let mut budget: Vec<f64> = lp.c.clone();
    budget.push(1.0);
    face.a.push(budget);
    face.b.push(opt + FACE_SLACK * opt.max(1.0));
    for i in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; ncols + 1];
            c[i] = sign;
            c[d + i] = -sign;
            face.c = c;
            // The face is nonempty and bounded by the ℓ1 budget.
            let Ok(s) = face.solve() else { return false };
            let wi = s.x[i] - s.x[d + i];
            lo = lo.min(wi);
            hi = hi.max(wi);
        }
        if hi - lo > SPREAD_TOL {
            return false;
        }
    }
    true
}
