//! The `Q^D_μ` penalty family.
//!
//! `Q^D_μ(w) = Σ_i q_D(w_i/μ)` with
//!
//! ```text
//! q_2(z) = 2 − √(4 + z²) + z·asinh(z/2)
//! q_D(z) = ∫₀^z h_D⁻¹(s) ds,   h_D(z) = (1−z)^{−D/(D−2)} − (1+z)^{−D/(D−2)}   (D > 2)
//! ```
//!
//! It is convex and even, behaves like `z²` near the origin and like `|z|`
//! (up to logarithmic factors for D = 2) far from it, which is how it
//! interpolates between ℓ2 (μ → ∞) and ℓ1 (μ → 0).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PenaltyError {
    #[error("h_D is only defined for D > 2 (got D = {0})")]
    DepthTooSmall(u32),
    #[error("depth must be an integer >= 2 (got {0})")]
    InvalidDepth(u32),
    #[error("mu must be positive and finite (got {0})")]
    InvalidMu(f64),
    #[error("h_D argument {0} is outside (-1 + 1e-12, 1 - 1e-12)")]
    Domain(f64),
}

/// Inputs closer than this to ±1 are rejected by [`h_d`].
pub const H_DOMAIN_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub depth: u32,
    pub mu: f64,
}

impl PenaltySpec {
    pub fn new(depth: u32, mu: f64) -> Result<Self, PenaltyError> {
        if depth < 2 {
            return Err(PenaltyError::InvalidDepth(depth));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(PenaltyError::InvalidMu(mu));
        }
        Ok(PenaltySpec { depth, mu })
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        q_value(w, self)
    }

    pub fn grad(&self, w: &[f64]) -> Vec<f64> {
        q_grad(w, self)
    }
}

fn exponent(depth: u32) -> f64 {
    let d = f64::from(depth);
    d / (d - 2.0)
}

/// `h_D(z)`, computed as `e^b·expm1(a − b)` to avoid cancellation near 0.
pub fn h_d(z: f64, depth: u32) -> Result<f64, PenaltyError> {
    if depth <= 2 {
        return Err(PenaltyError::DepthTooSmall(depth));
    }
    if !(z.abs() <= 1.0 - H_DOMAIN_MARGIN) {
        return Err(PenaltyError::Domain(z));
    }
    Ok(h_unchecked(z, exponent(depth)))
}

fn h_unchecked(z: f64, p: f64) -> f64 {
    let a = -p * (-z).ln_1p();
    let b = -p * z.ln_1p();
    b.exp() * (a - b).exp_m1()
}

fn h_prime_unchecked(z: f64, p: f64) -> f64 {
    p * ((-(p + 1.0)) * (-z).ln_1p()).exp() + p * ((-(p + 1.0)) * z.ln_1p()).exp()
}

/// `h_D'(z)`; bounded below by `2D/(D−2)` on the domain.
pub fn h_d_prime(z: f64, depth: u32) -> Result<f64, PenaltyError> {
    if depth <= 2 {
        return Err(PenaltyError::DepthTooSmall(depth));
    }
    if !(z.abs() <= 1.0 - H_DOMAIN_MARGIN) {
        return Err(PenaltyError::Domain(z));
    }
    Ok(h_prime_unchecked(z, exponent(depth)))
}

/// Inverse of `h_D`: safeguarded Newton inside a bisection bracket.
///
/// Arguments beyond `h_D(1 − 1e-12)` saturate at the bracket edge.
pub fn h_d_inv(s: f64, depth: u32) -> Result<f64, PenaltyError> {
    if depth <= 2 {
        return Err(PenaltyError::DepthTooSmall(depth));
    }
    Ok(h_inv_unchecked(s, exponent(depth)))
}

fn h_inv_unchecked(s: f64, p: f64) -> f64 {
    if s == 0.0 || s.is_nan() {
        return s;
    }
    if s < 0.0 {
        return -h_inv_unchecked(-s, p);
    }
    let mut lo = 0.0_f64;
    let mut hi = 1.0 - H_DOMAIN_MARGIN;
    if h_unchecked(hi, p) <= s {
        return hi;
    }
    // Small s: h ≈ 2p·z. Large s: h ≈ (1−z)^{−p}.
    let mut z = if s < 1.0 { s / (2.0 * p) } else { 1.0 - s.powf(-1.0 / p) };
    z = z.clamp(lo, hi);
    let tol = 1e-13 * s.max(1.0);
    for _ in 0..200 {
        let f = h_unchecked(z, p) - s;
        if f.abs() <= tol {
            return z;
        }
        if f > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let step = f / h_prime_unchecked(z, p);
        let mut next = z - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == z || hi - lo <= f64::EPSILON * hi {
            return next;
        }
        z = next;
    }
    z
}

/// `q_D(z)`: closed form for D = 2, adaptive Simpson over `h_D⁻¹` for D > 2.
pub fn q_d(z: f64, depth: u32) -> Result<f64, PenaltyError> {
    match depth {
        0 | 1 => Err(PenaltyError::InvalidDepth(depth)),
        2 => Ok(q2(z)),
        _ => Ok(q_quadrature(z.abs(), exponent(depth))),
    }
}

fn q2(z: f64) -> f64 {
    // 2 − √(4+z²) rewritten to avoid cancellation for small z.
    z * (0.5 * z).asinh() - z * z / (2.0 + (4.0 + z * z).sqrt())
}

fn q_quadrature(z: f64, p: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let f = |s: f64| h_inv_unchecked(s, p);
    adaptive_simpson(&f, 0.0, z, 1e-10, 50)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `q_D'(z)`: `asinh(z/2)` for D = 2, `h_D⁻¹(z)` for D > 2.
pub fn q_d_prime(z: f64, depth: u32) -> f64 {
    if depth == 2 {
        (0.5 * z).asinh()
    } else {
        h_inv_unchecked(z, exponent(depth))
    }
}

/// `q_D''(z)`: `1/√(4+z²)` for D = 2, `1/h_D'(h_D⁻¹(z))` for D > 2.
pub fn q_d_second(z: f64, depth: u32) -> f64 {
    if depth == 2 {
        1.0 / (4.0 + z * z).sqrt()
    } else {
        let p = exponent(depth);
        1.0 / h_prime_unchecked(h_inv_unchecked(z, p), p)
    }
}

pub fn q_value(w: &[f64], spec: &PenaltySpec) -> f64 {
    w.iter().map(|&wi| q_d(wi / spec.mu, spec.depth).expect("validated spec")).sum()
}

/// `∇Q^D_μ(w)_i = q_D'(w_i/μ)/μ`.
pub fn q_grad(w: &[f64], spec: &PenaltySpec) -> Vec<f64> {
    w.iter().map(|&wi| q_d_prime(wi / spec.mu, spec.depth) / spec.mu).collect()
}

/// Diagonal of the Hessian, `q_D''(w_i/μ)/μ²`.
pub fn q_hess_diag(w: &[f64], spec: &PenaltySpec) -> Vec<f64> {
    w.iter().map(|&wi| q_d_second(wi / spec.mu, spec.depth) / (spec.mu * spec.mu)).collect()
}
