use super::{q_mu_max_margin, q_mu_max_margin_from, MarginError, MarginSolution};
use crate::data::Dataset;
use crate::penalty::PenaltySpec;

/// `Q^D_μ` max-margin solutions along a descending μ grid, each warm-started
/// from the previous one. Returned in grid order.
pub fn q_path(data: &Dataset, depth: u32, mu_grid: &[f64]) -> Result<Vec<MarginSolution>, MarginError> {
    if mu_grid.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(MarginError::Invalid("mu grid must be positive and finite".into()));
    }
    if mu_grid.windows(2).any(|p| p[1] >= p[0]) {
        return Err(MarginError::Invalid("mu grid must be strictly descending".into()));
    }
    let mut out: Vec<MarginSolution> = Vec::with_capacity(mu_grid.len());
    for (index, &mu) in mu_grid.iter().enumerate() {
        let spec = PenaltySpec::new(depth, mu).map_err(|e| MarginError::Invalid(e.to_string()))?;
        let res = match out.last() {
            None => q_mu_max_margin(data, &spec),
            Some(prev) => q_mu_max_margin_from(data, &spec, &prev.w),
        };
        let sol = res.map_err(|source| MarginError::Path { index, mu, source: Box::new(source) })?;
        out.push(sol);
    }
    Ok(out)
}

/// `n` log-spaced values from `hi` down to `lo`.
pub fn log_grid(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo && lo > 0.0);
    let (a, b) = (hi.ln(), lo.ln());
    let mut grid: Vec<f64> = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect();
    grid[0] = hi;
    grid[n - 1] = lo;
    grid
}
