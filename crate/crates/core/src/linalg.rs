//! Small dense vector helpers shared by the solvers and the simulator.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| x * c).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Angle between two nonzero vectors in degrees.
///
/// Returns `NaN` when either vector is zero.
pub fn angle_deg(a: &[f64], b: &[f64]) -> f64 {
    let na = norm2(a);
    let nb = norm2(b);
    if na == 0.0 || nb == 0.0 {
        return f64::NAN;
    }
    let c = (dot(a, b) / (na * nb)).clamp(-1.0, 1.0);
    // acos is badly conditioned near 1; use atan2 of |a×b| and a·b instead.
    let s = sin_between(a, b, na, nb);
    s.atan2(c).to_degrees()
}

fn sin_between(a: &[f64], b: &[f64], na: f64, nb: f64) -> f64 {
    // |â − (â·b̂) b̂| is the sine of the angle for unit vectors.
    let c = dot(a, b) / (na * nb);
    let r: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let v = x / na - c * y / nb;
            v * v
        })
        .sum();
    r.sqrt()
}

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}
