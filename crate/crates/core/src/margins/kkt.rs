use super::{KktResiduals, MarginSolution, Objective};
use crate::data::Dataset;
use crate::linalg::norm_inf;
use crate::penalty::q_grad;

/// Coordinates with `|w_i|` at or below this are treated as zero when picking
/// a subgradient.
const ZERO_TOL: f64 = 1e-12;

/// Recomputes KKT residuals of `solution` for `objective`, independently of
/// the solver that produced it.
pub fn kkt_check(solution: &MarginSolution, data: &Dataset, objective: &Objective) -> KktResiduals {
    residuals(&solution.w, &solution.nu, data, objective)
}

pub(crate) fn residuals(w: &[f64], nu: &[f64], data: &Dataset, objective: &Objective) -> KktResiduals {
    let margins = data.margins_of(w);
    let primal = margins.iter().map(|m| (1.0 - m).max(0.0)).fold(0.0, f64::max);
    let nu_scale = norm_inf(nu).max(1.0);
    let dual_sign = nu.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max) / nu_scale;
    let complementarity = nu.iter().zip(&margins).map(|(v, m)| (v * (m - 1.0)).abs()).fold(0.0, f64::max) / nu_scale;
    let v = data.combine(nu);
    let stationarity = match objective {
        Objective::L2 => sup_dist(w, &v),
        Objective::L1 => l1_subgradient_gap(w, &v),
        Objective::Lq { depth } if *depth <= 2 => l1_subgradient_gap(w, &v),
        Objective::Lq { depth } => {
            let p = 2.0 / f64::from(*depth);
            let wmax = norm_inf(w);
            let mut grad_scale: f64 = 1.0;
            let mut worst: f64 = 0.0;
            for (wi, vi) in w.iter().zip(&v) {
                // Clarke subdifferential of |t|^p at 0 is all of R.
                if wi.abs() > 1e-9 * wmax {
                    let g = p * wi.abs().powf(p - 1.0) * wi.signum();
                    grad_scale = grad_scale.max(g.abs());
                    worst = worst.max((g - vi).abs());
                }
            }
            worst / grad_scale
        }
        Objective::QMu(spec) => {
            let g = q_grad(w, spec);
            sup_dist(&g, &v) / norm_inf(&g).max(1.0)
        }
    };
    KktResiduals { stationarity: stationarity.max(dual_sign), primal, complementarity }
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Distance of `v` from `∂‖w‖₁`: `sign(w_i)` on the support, `[-1, 1]` off it.
fn l1_subgradient_gap(w: &[f64], v: &[f64]) -> f64 {
    w.iter()
        .zip(v)
        .map(|(&wi, &vi)| if wi.abs() > ZERO_TOL { (vi - wi.signum()).abs() } else { (vi.abs() - 1.0).max(0.0) })
        .fold(0.0, f64::max)
}
