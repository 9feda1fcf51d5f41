//! Dense two-phase simplex for the small linear programs used here.
//!
//! Solves `min cᵀx s.t. Ax = b, x ≥ 0` with Bland's rule. The final basis is
//! re-solved with an LU factorization so primal values and duals are as
//! accurate as the basis matrix allows.

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Multipliers `y` with `Aᵀy ≤ c` at optimality (one per original row).
    pub duals: Vec<f64>,
    pub objective: f64,
    pub basis: Vec<usize>,
}

struct Tableau {
    /// m rows of `[coefficients | rhs]`.
    rows: Vec<Vec<f64>>,
    /// Reduced costs with `-objective` in the last slot.
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Original row index of each tableau row (rows may be dropped).
    origin: Vec<usize>,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.cost.len() - 1
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[col];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = col;
    }

    /// Runs Bland-rule pivots over the first `allowed` columns.
    fn optimize(&mut self, allowed: usize) -> Result<(), LpError> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed).find(|&j| self.cost[j] < -COST_TOL);
            let Some(col) = entering else { return Ok(()) };
            let rhs = self.ncols();
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > PIVOT_TOL {
                    let ratio = row[rhs] / row[col];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-14 || (ratio <= br + 1e-14 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else { return Err(LpError::Unbounded) };
            self.pivot(r, col);
        }
        Err(LpError::IterationLimit)
    }
}

impl LinearProgram {
    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let m = self.a.len();
        let n = self.c.len();
        // Phase 1: artificial column per row, rows sign-normalized to b ≥ 0.
        let mut rows = Vec::with_capacity(m);
        for (i, (arow, &bi)) in self.a.iter().zip(&self.b).enumerate() {
            let sign = if bi < 0.0 { -1.0 } else { 1.0 };
            let mut row: Vec<f64> = arow.iter().map(|v| sign * v).collect();
            row.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
            row.push(sign * bi);
            rows.push(row);
        }
        let mut cost = vec![0.0; n + m + 1];
        for row in &rows {
            for j in 0..n {
                cost[j] -= row[j];
            }
            cost[n + m] -= row[n + m];
        }
        let mut t = Tableau { rows, cost, basis: (n..n + m).collect(), origin: (0..m).collect() };
        t.optimize(n + m)?;
        let infeasibility = -t.cost[n + m];
        let scale = self.b.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        if infeasibility > 1e-9 * scale {
            return Err(LpError::Infeasible);
        }

        // Drive artificials out; drop rows that are redundant.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= n {
                match (0..n).find(|&j| t.rows[r][j].abs() > 1e-9) {
                    Some(j) => {
                        t.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                        t.origin.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }

        // Phase 2 on the original columns.
        let width = n + m;
        let mut cost = vec![0.0; width + 1];
        cost[..n].copy_from_slice(&self.c);
        for (row, &bcol) in t.rows.iter().zip(&t.basis) {
            let cb = self.c[bcol];
            if cb != 0.0 {
                for (v, rv) in cost.iter_mut().zip(row) {
                    *v -= cb * rv;
                }
            }
        }
        t.cost = cost;
        t.optimize(n)?;

        Ok(self.refine(&t.basis, &t.origin))
    }

    /// Recomputes `x_B = B⁻¹b` and `y = B⁻ᵀc_B` from the final basis.
    fn refine(&self, basis: &[usize], origin: &[usize]) -> LpSolution {
        let k = basis.len();
        let n = self.c.len();
        let bmat = DMatrix::from_fn(k, k, |i, j| self.a[origin[i]][basis[j]]);
        let rhs = DVector::from_fn(k, |i, _| self.b[origin[i]]);
        let cb = DVector::from_fn(k, |j, _| self.c[basis[j]]);
        let lu = bmat.clone().lu();
        let xb = lu.solve(&rhs).expect("basis matrix is nonsingular");
        let y = bmat.transpose().lu().solve(&cb).expect("basis matrix is nonsingular");
        let mut x = vec![0.0; n];
        for (j, &col) in basis.iter().enumerate() {
            x[col] = xb[j].max(0.0);
        }
        let mut duals = vec![0.0; self.a.len()];
        for (i, &row) in origin.iter().enumerate() {
            duals[row] = y[i];
        }
        let objective = self.c.iter().zip(&x).map(|(c, x)| c * x).sum();
        LpSolution { x, duals, objective, basis: basis.to_vec() }
    }
}

/// Standard form of `min Σ c_i|w_i| s.t. z_nᵀw ≥ 1` over `[w⁺, w⁻, s]`.
pub(crate) fn weighted_l1_program(data: &Dataset, weights: &[f64]) -> LinearProgram {
    let d = data.dim();
    let nsamp = data.len();
    let a = data
        .effective_points()
        .iter()
        .enumerate()
        .map(|(n, z)| {
            let mut row = Vec::with_capacity(2 * d + nsamp);
            row.extend_from_slice(z);
            row.extend(z.iter().map(|v| -v));
            row.extend((0..nsamp).map(|k| if k == n { -1.0 } else { 0.0 }));
            row
        })
        .collect();
    let mut c = Vec::with_capacity(2 * d + nsamp);
    c.extend_from_slice(weights);
    c.extend_from_slice(weights);
    c.extend(std::iter::repeat_n(0.0, nsamp));
    LinearProgram { a, b: vec![1.0; nsamp], c }
}

pub(crate) fn split_w(x: &[f64], d: usize) -> Vec<f64> {
    (0..d).map(|i| x[i] - x[d + i]).collect()
}

/// Feasibility of `z_nᵀw ≥ 1` for all n.
pub fn is_strictly_separable(data: &Dataset) -> bool {
    let mut lp = weighted_l1_program(data, &vec![0.0; data.dim()]);
    lp.c.iter_mut().for_each(|c| *c = 0.0);
    lp.solve().is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_program() {
        // min -x - y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let lp = LinearProgram {
            a: vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]],
            b: vec![4.0, 6.0],
            c: vec![-1.0, -1.0, 0.0, 0.0],
        };
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 1.6).abs() < 1e-12 && (s.x[1] - 1.2).abs() < 1e-12);
        assert!((s.objective + 2.8).abs() < 1e-12);
        // Strong duality.
        let dual_obj: f64 = s.duals.iter().zip(&lp.b).map(|(y, b)| y * b).sum();
        assert!((dual_obj - s.objective).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram { a: vec![vec![1.0], vec![1.0]], b: vec![1.0, 2.0], c: vec![0.0] };
        assert_eq!(lp.solve().unwrap_err(), LpError::Infeasible);
        let lp = LinearProgram { a: vec![vec![1.0, -1.0]], b: vec![1.0], c: vec![-1.0, 0.0] };
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let lp = LinearProgram { a: vec![vec![1.0, 1.0], vec![2.0, 2.0]], b: vec![1.0, 2.0], c: vec![1.0, 2.0] };
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1].abs() < 1e-12);
    }

    #[test]
    fn separability() {
        let sep = Dataset::from_effective(vec![vec![1.0, 0.2], vec![0.5, -1.0]]).unwrap();
        assert!(is_strictly_separable(&sep));
        let opp = Dataset::from_effective(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(!is_strictly_separable(&opp));
        let zero = Dataset::from_effective(vec![vec![0.0, 0.0]]).unwrap();
        assert!(!is_strictly_separable(&zero));
    }
}
