use nalgebra::DMatrix;

use super::{DynamicsError, NetParams};
use crate::data::Dataset;

/// `K_nm = D² Σ_i (u₊ᵢ^{2D−2} + u₋ᵢ^{2D−2}) x_{n,i} x_{m,i}` on the raw points.
pub fn tangent_kernel(params: &NetParams, data: &Dataset) -> DMatrix<f64> {
    let dd = f64::from(params.depth);
    let e = 2 * params.depth as i32 - 2;
    let diag: Vec<f64> =
        params.u_plus.iter().zip(&params.u_minus).map(|(a, b)| dd * dd * (a.powi(e) + b.powi(e))).collect();
    let xs = data.points();
    let n = xs.len();
    DMatrix::from_fn(n, n, |r, c| xs[r].iter().zip(&xs[c]).zip(&diag).map(|((a, b), k)| k * a * b).sum())
}

/// `1 − ⟨K_t, K_0⟩_F / (‖K_t‖_F ‖K_0‖_F)`.
pub fn kernel_distance(k_t: &DMatrix<f64>, k_0: &DMatrix<f64>) -> Result<f64, DynamicsError> {
    if k_t.shape() != k_0.shape() {
        return Err(DynamicsError::ShapeMismatch(format!("{:?} vs {:?}", k_t.shape(), k_0.shape())));
    }
    let (nt, n0) = (k_t.norm(), k_0.norm());
    if nt == 0.0 || n0 == 0.0 {
        return Err(DynamicsError::ZeroKernel);
    }
    Ok(1.0 - k_t.dot(k_0) / (nt * n0))
}
