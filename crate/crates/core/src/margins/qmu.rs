//! Log-barrier interior point for `argmin Q^D_μ(w) s.t. z_nᵀw ≥ 1`.
//!
//! The objective is rescaled by `c = 1/‖∇Q(w₀)‖∞` so barrier parameters and
//! stopping tolerances are independent of μ. Barrier schedule: `t₀ = 1`,
//! `×10` per outer iteration, stop when the duality-gap estimate `N/t` drops
//! below 1e-9. Duals are recovered as `ν_n = 1/(c·t·(z_nᵀw − 1))`.

use nalgebra::{DMatrix, DVector};

use super::kkt::residuals;
use super::{l2_max_margin, MarginError, MarginSolution, Objective, UniqueHint};
use crate::data::Dataset;
use crate::linalg::{dot, norm_inf, scale};
use crate::penalty::{q_grad, q_hess_diag, q_value, PenaltySpec};

const T0: f64 = 1.0;
const T_GROWTH: f64 = 10.0;
const GAP_TOL: f64 = 1e-9;
const MAX_NEWTON: usize = 200;
const DECREMENT_TOL: f64 = 1e-16;

pub fn q_mu_max_margin(data: &Dataset, spec: &PenaltySpec) -> Result<MarginSolution, MarginError> {
    let l2 = l2_max_margin(data)?;
    let start = scale(&l2.w, 2.0);
    solve(data, spec, &start)
}

/// Same problem, started from `start` (pushed slightly outward if it sits on
/// the margin boundary).
pub fn q_mu_max_margin_from(data: &Dataset, spec: &PenaltySpec, start: &[f64]) -> Result<MarginSolution, MarginError> {
    if !data.is_separable() {
        return Err(MarginError::NotSeparable);
    }
    if start.len() != data.dim() {
        return Err(MarginError::Invalid(format!("start has dimension {}, data has {}", start.len(), data.dim())));
    }
    let min_margin = data.margins_of(start).into_iter().fold(f64::INFINITY, f64::min);
    if min_margin > 1.0 + 1e-3 {
        return solve(data, spec, start);
    }
    if min_margin > 0.0 {
        let pushed = scale(start, 1.01 / min_margin);
        return solve(data, spec, &pushed);
    }
    q_mu_max_margin(data, spec)
}

struct Barrier<'a> {
    data: &'a Dataset,
    spec: &'a PenaltySpec,
    c: f64,
    t: f64,
}

impl Barrier<'_> {
    fn slacks(&self, w: &[f64]) -> Vec<f64> {
        self.data.margins_of(w).into_iter().map(|m| m - 1.0).collect()
    }

    fn gradient(&self, w: &[f64], slack: &[f64]) -> Vec<f64> {
        let mut g = scale(&q_grad(w, self.spec), self.c);
        for (z, s) in self.data.effective_points().iter().zip(slack) {
            for (gi, zi) in g.iter_mut().zip(z) {
                *gi -= zi / (self.t * s);
            }
        }
        g
    }

    fn hessian(&self, w: &[f64], slack: &[f64]) -> DMatrix<f64> {
        let d = w.len();
        let diag = q_hess_diag(w, self.spec);
        let mut h = DMatrix::from_fn(d, d, |i, j| if i == j { self.c * diag[i] } else { 0.0 });
        for (z, s) in self.data.effective_points().iter().zip(slack) {
            let k = 1.0 / (self.t * s * s);
            for i in 0..d {
                for j in 0..d {
                    h[(i, j)] += k * z[i] * z[j];
                }
            }
        }
        h
    }

    /// Directional derivative of the barrier objective at `w + s·dir`.
    fn slope(&self, w: &[f64], dir: &[f64], s: f64) -> f64 {
        let p: Vec<f64> = w.iter().zip(dir).map(|(a, b)| a + s * b).collect();
        let slack = self.slacks(&p);
        dot(&self.gradient(&p, &slack), dir)
    }

    /// Damped Newton to the central point for the current `t`.
    fn center(&self, mut w: Vec<f64>) -> Result<Vec<f64>, MarginError> {
        for _ in 0..MAX_NEWTON {
            let slack = self.slacks(&w);
            let g = self.gradient(&w, &slack);
            let h = self.hessian(&w, &slack);
            let chol = h.cholesky().ok_or_else(|| MarginError::Newton {
                t: self.t,
                reason: "barrier Hessian is not positive definite".into(),
                last: w.clone(),
            })?;
            let dir: Vec<f64> = chol.solve(&DVector::from_column_slice(&g)).iter().map(|v| -v).collect();
            let decrement = -dot(&g, &dir);
            if decrement <= DECREMENT_TOL {
                return Ok(w);
            }
            // Stay strictly inside: largest step keeping all slacks positive.
            let zd = self.data.margins_of(&dir);
            let s_max =
                slack.iter().zip(&zd).filter(|(_, &r)| r < 0.0).map(|(s, r)| -s / r).fold(f64::INFINITY, f64::min);
            let hi = (0.99 * s_max).min(1.0);
            let step = if self.slope(&w, &dir, hi) <= 0.0 {
                hi
            } else {
                // φ is convex along the ray: bisect for the zero of its slope.
                let (mut a, mut b) = (0.0, hi);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if self.slope(&w, &dir, m) <= 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                a
            };
            if step == 0.0 {
                return Ok(w);
            }
            let next: Vec<f64> = w.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            if next == w {
                return Ok(w);
            }
            w = next;
        }
        Err(MarginError::Newton { t: self.t, reason: format!("no convergence in {MAX_NEWTON} Newton steps"), last: w })
    }
}

fn solve(data: &Dataset, spec: &PenaltySpec, start: &[f64]) -> Result<MarginSolution, MarginError> {
    let gscale = norm_inf(&q_grad(start, spec));
    let c = if gscale > 0.0 && gscale.is_finite() { 1.0 / gscale } else { 1.0 };
    let n = data.len() as f64;
    let mut barrier = Barrier { data, spec, c, t: T0 };
    let mut w = start.to_vec();
    loop {
        w = barrier.center(w)?;
        if n / barrier.t < GAP_TOL {
            break;
        }
        barrier.t *= T_GROWTH;
    }
    let slack = barrier.slacks(&w);
    let nu: Vec<f64> = slack.iter().map(|s| 1.0 / (c * barrier.t * s)).collect();
    let objective = q_value(&w, spec);
    let kind = Objective::QMu(*spec);
    let mut kkt_residuals = residuals(&w, &nu, data, &kind);
    let mut nu = nu;
    if let Some(refit) = refit_duals(data, &w, &nu, spec) {
        let r = residuals(&w, &refit, data, &kind);
        if r.max() < kkt_residuals.max() {
            (nu, kkt_residuals) = (refit, r);
        }
    }
    Ok(MarginSolution {
        objective_kind: kind,
        w,
        objective,
        nu,
        kkt_residuals,
        unique_hint: UniqueHint::Unique,
        local: false,
    })
}

/// Least-squares duals on the constraints the barrier marks as active.
///
/// Barrier multipliers `1/(c·t·slack)` lose digits once the slack nears the
/// rounding level of the margins; fitting `Σ ν_n z_n = ∇Q` directly does not.
fn refit_duals(data: &Dataset, w: &[f64], nu: &[f64], spec: &PenaltySpec) -> Option<Vec<f64>> {
    let top = norm_inf(nu);
    let active: Vec<usize> = (0..nu.len()).filter(|&n| nu[n] > 1e-6 * top).collect();
    if active.is_empty() {
        return None;
    }
    let zs = data.effective_points();
    let d = w.len();
    let a = DMatrix::from_fn(d, active.len(), |i, j| zs[active[j]][i]);
    let g = DVector::from_vec(q_grad(w, spec));
    let sol = a.svd(true, true).solve(&g, 1e-14).ok()?;
    if sol.iter().any(|&v| v < 0.0) {
        return None;
    }
    let mut out = vec![0.0; nu.len()];
    for (j, &n) in active.iter().enumerate() {
        out[n] = sol[j];
    }
    Some(out)
}
