//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use diagnet::data::{presets, Dataset};
use diagnet::linalg::{dot, norm2};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every bundled dataset with d ≤ 3 and N ≤ 4.
pub fn small_datasets() -> Vec<(&'static str, Dataset)> {
    vec![
        ("unique-l1", presets::unique_l1()),
        ("many-l1", presets::many_l1()),
        ("kinked-path", presets::kinked_path()),
        ("depth3-a", presets::depth3_a()),
        ("depth3-b", presets::depth3_b()),
        ("single", Dataset::from_effective(vec![vec![2.0, 0.0]]).unwrap()),
        ("pair", Dataset::from_effective(vec![vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap()),
        (
            "mixed",
            Dataset::new(
                vec![vec![1.0, -0.4, 0.2], vec![-0.3, -1.1, 0.5], vec![0.8, 0.9, -0.1], vec![0.2, -0.5, 1.2]],
                vec![1, -1, 1, 1],
            )
            .unwrap(),
        ),
    ]
}

fn unit(az: f64, pitch: f64) -> [f64; 3] {
    [pitch.cos() * az.cos(), pitch.cos() * az.sin(), pitch.sin()]
}

fn min_margin(data: &Dataset, w: &[f64]) -> f64 {
    data.effective_points().iter().map(|z| dot(z, w)).fold(f64::INFINITY, f64::min)
}

/// Max over unit directions of the minimum margin, for d = 2 or 3: a global
/// 0.5° grid, then random pattern search on shrinking disks around the
/// incumbent.
/// Returns `(margin, direction)`.
pub fn sphere_grid_max_margin(data: &Dataset) -> (f64, Vec<f64>) {
    let step = 0.5f64.to_radians();
    let d = data.dim();
    let eval = |az: f64, pitch: f64| -> (f64, Vec<f64>) {
        let u = unit(az, pitch);
        let w = u[..d].to_vec();
        (min_margin(data, &w), w)
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let n_az = (360.0 / 0.5) as i64;
    let n_pitch = if d == 3 { (90.0 / 0.5) as i64 } else { 0 };
    for i in 0..n_az {
        for j in -n_pitch..=n_pitch {
            let (az, p) = (i as f64 * step, j as f64 * step);
            let (m, _) = eval(az, p);
            if m > best.0 {
                best = (m, az, p);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut h = step;
    while h > 1e-13 {
        let (_, az0, p0) = best;
        for _ in 0..2000 {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = h * rng.gen_range(0.0..1.0f64);
            let (az, p) = (az0 + r * theta.cos(), if d == 3 { p0 + r * theta.sin() } else { 0.0 });
            let (m, _) = eval(az, p);
            if m > best.0 {
                best = (m, az, p);
            }
        }
        if best.1 == az0 && best.2 == p0 {
            h /= 2.0;
        }
    }
    let (m, w) = eval(best.1, best.2);
    (m, w)
}

/// Minimum of `‖w‖₁ s.t. Zw ≥ 1` by enumerating every basis of the standard
/// form over `[w⁺, w⁻, s]`. Returns `None` when no basis is feasible.
pub fn l1_by_vertex_enumeration(data: &Dataset) -> Option<f64> {
    let zs = data.effective_points();
    let (n, d) = (zs.len(), data.dim());
    let cols = 2 * d + n;
    let column = |j: usize| -> Vec<f64> {
        (0..n)
            .map(|r| {
                if j < d {
                    zs[r][j]
                } else if j < 2 * d {
                    -zs[r][j - d]
                } else if j - 2 * d == r {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect()
    };
    let mut best: Option<f64> = None;
    for basis in combinations(cols, n) {
        let b = DMatrix::from_fn(n, n, |r, c| column(basis[c])[r]);
        let Some(x) = b.clone().lu().solve(&DVector::from_element(n, 1.0)) else { continue };
        if (&b * &x - DVector::from_element(n, 1.0)).amax() > 1e-9 || x.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let obj: f64 = basis.iter().zip(x.iter()).filter(|(&j, _)| j < 2 * d).map(|(_, v)| v.max(0.0)).sum();
        best = Some(best.map_or(obj, |b: f64| b.min(obj)));
    }
    best
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub fn rel_dist(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff) / norm2(b)
}

/// Minimum-norm `w` with `Zw ≥ 1`, by trying the minimum-norm solution of
/// `Z_S w = 1` for every subset `S` of at most `d` samples and keeping the
/// shortest feasible one.
pub fn l2_by_subset_enumeration(data: &Dataset) -> Option<Vec<f64>> {
    let zs = data.effective_points();
    let d = data.dim();
    let mut best: Option<Vec<f64>> = None;
    for k in 1..=d.min(zs.len()) {
        for subset in combinations(zs.len(), k) {
            let a = DMatrix::from_fn(k, d, |r, c| zs[subset[r]][c]);
            let gram = &a * a.transpose();
            let Some(y) = gram.lu().solve(&DVector::from_element(k, 1.0)) else { continue };
            let w: Vec<f64> = (a.transpose() * y).iter().copied().collect();
            if !w.iter().all(|v| v.is_finite()) || min_margin(data, &w) < 1.0 - 1e-12 {
                continue;
            }
            if best.as_ref().is_none_or(|b| norm2(&w) < norm2(b)) {
                best = Some(w);
            }
        }
    }
    best
}
