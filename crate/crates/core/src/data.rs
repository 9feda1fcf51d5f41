//! Dataset ingestion and the fixed statistics every other module consumes.
//!
//! Labels are absorbed at construction: downstream code only sees the
//! effective points `z_n = y_n·x_n`, so every margin is `z_nᵀw`.

use std::io::Read;
use std::path::Path;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{norm2, scale};
use crate::margins;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dataset is empty")]
    Empty,
    #[error("row {row} has dimension {got}, expected {expected}")]
    DimensionMismatch { row: usize, expected: usize, got: usize },
    #[error("row {row} has label {label}; labels must be -1 or +1")]
    InvalidLabel { row: usize, label: f64 },
    #[error("row {row} contains a non-finite value")]
    NonFinite { row: usize },
    #[error("{points} points but {labels} labels")]
    LengthMismatch { points: usize, labels: usize },
    #[error("unknown dataset format for {0}; use .json or .csv")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Json,
    Csv,
}

impl DataFormat {
    pub fn from_path(path: &Path) -> Result<Self, DataError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Ok(DataFormat::Json),
            Some(e) if e.eq_ignore_ascii_case("csv") => Ok(DataFormat::Csv),
            _ => Err(DataError::UnknownFormat(path.display().to_string())),
        }
    }
}

/// A labelled point set in `R^d` with labels absorbed into effective points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawDataset", into = "RawDataset")]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    labels: Vec<i8>,
    effective: Vec<Vec<f64>>,
    #[serde(skip)]
    separable: OnceLock<bool>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.labels == other.labels
    }
}

/// On-disk JSON schema: `{"points": [[..], ..], "labels": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawDataset {
    points: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

impl TryFrom<RawDataset> for Dataset {
    type Error = DataError;

    fn try_from(raw: RawDataset) -> Result<Self, DataError> {
        if raw.points.len() != raw.labels.len() {
            return Err(DataError::LengthMismatch { points: raw.points.len(), labels: raw.labels.len() });
        }
        let labels =
            raw.labels.iter().enumerate().map(|(row, &l)| parse_label(row, l)).collect::<Result<Vec<_>, _>>()?;
        Dataset::new(raw.points, labels)
    }
}

impl From<Dataset> for RawDataset {
    fn from(d: Dataset) -> Self {
        RawDataset { labels: d.labels.iter().map(|&l| f64::from(l)).collect(), points: d.points }
    }
}

fn parse_label(row: usize, label: f64) -> Result<i8, DataError> {
    if label == 1.0 {
        Ok(1)
    } else if label == -1.0 {
        Ok(-1)
    } else {
        Err(DataError::InvalidLabel { row, label })
    }
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self, DataError> {
        if points.is_empty() {
            return Err(DataError::Empty);
        }
        if points.len() != labels.len() {
            return Err(DataError::LengthMismatch { points: points.len(), labels: labels.len() });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(DataError::DimensionMismatch { row: 0, expected: 1, got: 0 });
        }
        for (row, (p, &l)) in points.iter().zip(&labels).enumerate() {
            if p.len() != dim {
                return Err(DataError::DimensionMismatch { row, expected: dim, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(DataError::NonFinite { row });
            }
            if l != 1 && l != -1 {
                return Err(DataError::InvalidLabel { row, label: f64::from(l) });
            }
        }
        let effective = points.iter().zip(&labels).map(|(p, &l)| scale(p, f64::from(l))).collect();
        Ok(Dataset { points, labels, effective, separable: OnceLock::new() })
    }

    /// All-positive labels, i.e. the points are already effective points.
    pub fn from_effective(points: Vec<Vec<f64>>) -> Result<Self, DataError> {
        let labels = vec![1; points.len()];
        Dataset::new(points, labels)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn effective_points(&self) -> &[Vec<f64>] {
        &self.effective
    }

    /// `Xv = Σ_n v_n z_n`, a d-vector.
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (z, &v) in self.effective.iter().zip(weights) {
            for (o, zi) in out.iter_mut().zip(z) {
                *o += v * zi;
            }
        }
        out
    }

    /// Margins `z_nᵀw` of every sample.
    pub fn margins_of(&self, w: &[f64]) -> Vec<f64> {
        self.effective.iter().map(|z| crate::linalg::dot(z, w)).collect()
    }

    /// Whether some `w` has `z_nᵀw > 0` for all `n`; cached after first call.
    pub fn is_separable(&self) -> bool {
        *self.separable.get_or_init(|| margins::lp::is_strictly_separable(self))
    }

    /// Uniform `U(0,1)` coordinates, all labels +1 (always separable).
    pub fn uniform_random(seed: u64, n: usize, d: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
        Dataset::from_effective(points).expect("generated data is valid")
    }

    /// First coordinate 1, remaining coordinates `U(0, noise)`, labels +1.
    pub fn sparse_random(seed: u64, n: usize, d: usize, noise: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|_| {
                let mut p = vec![1.0];
                p.extend((1..d).map(|_| noise * rng.gen::<f64>()));
                p
            })
            .collect();
        Dataset::from_effective(points).expect("generated data is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: Option<DataFormat>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let format = match format {
        Some(f) => f,
        None => DataFormat::from_path(path)?,
    };
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    match format {
        DataFormat::Json => parse_json(&text),
        DataFormat::Csv => parse_csv(&text),
    }
}

pub fn parse_json(text: &str) -> Result<Dataset, DataError> {
    let raw: RawDataset = serde_json::from_str(text).map_err(|e| DataError::Parse(e.to_string()))?;
    Dataset::try_from(raw)
}

/// One sample per row, last column is the label. No header; `#` lines are skipped.
pub fn parse_csv(text: &str) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| DataError::Parse(e.to_string()))?;
        let vals = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| DataError::Parse(format!("row {row}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() < 2 {
            return Err(DataError::Parse(format!("row {row}: need at least one coordinate and a label")));
        }
        let (label, point) = vals.split_last().expect("nonempty");
        labels.push(parse_label(row, *label)?);
        points.push(point.to_vec());
    }
    Dataset::new(points, labels)
}

/// Fixed statistics of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataStats {
    /// Max ℓ2 margin `max_{‖w‖=1} min_n z_nᵀw`; 0 when not separable.
    pub gamma2: f64,
    /// `x̄_i = Σ_n |x_{n,i}|`.
    pub xbar_per_coord: Vec<f64>,
    pub xbar: f64,
    /// `max_n ‖x_n‖₂`.
    pub xmax: f64,
    pub separable: bool,
    /// Unit vector achieving `gamma2`; `None` when not separable.
    pub witness: Option<Vec<f64>>,
}

pub fn compute_stats(data: &Dataset) -> DataStats {
    let d = data.dim();
    let mut xbar_per_coord = vec![0.0; d];
    for p in data.points() {
        for (acc, v) in xbar_per_coord.iter_mut().zip(p) {
            *acc += v.abs();
        }
    }
    let xbar = xbar_per_coord.iter().cloned().fold(0.0, f64::max);
    let xmax = data.points().iter().map(|p| norm2(p)).fold(0.0, f64::max);

    let (gamma2, witness) = match margins::l2_max_margin(data) {
        Ok(sol) => {
            let n = norm2(&sol.w);
            (1.0 / n, Some(scale(&sol.w, 1.0 / n)))
        }
        Err(_) => (0.0, None),
    };
    DataStats { gamma2, xbar_per_coord, xbar, xmax, separable: witness.is_some(), witness }
}

/// Small hand-built datasets (all labels +1).
pub mod presets {
    use super::Dataset;

    /// Unique ℓ1 solution; support vectors do not change along the path.
    pub fn unique_l1() -> Dataset {
        Dataset::from_effective(vec![vec![0.3, 1.5, 1.0], vec![1.5, 3.0, 1.0], vec![1.0, 2.5, 1.0]]).unwrap()
    }

    /// Non-unique ℓ1 solution.
    pub fn many_l1() -> Dataset {
        Dataset::from_effective(vec![vec![0.5, 1.0, 1.0], vec![1.0, 1.5, 1.0], vec![1.5, 2.0, 0.5]]).unwrap()
    }

    /// ℓ2 and ℓ1 support vectors differ; the `Q_μ` path has a kink.
    pub fn kinked_path() -> Dataset {
        Dataset::from_effective(vec![vec![3.0, 1.0, 1.0], vec![2.7, 2.0, 1.5], vec![4.5, 2.6, 0.5]]).unwrap()
    }

    /// Depth-3 example with a local minimum.
    pub fn depth3_a() -> Dataset {
        Dataset::from_effective(vec![vec![0.6, 0.7, 0.8], vec![0.7, 0.6, 0.6], vec![1.0, 0.5, 0.5]]).unwrap()
    }

    pub fn depth3_b() -> Dataset {
        Dataset::from_effective(vec![vec![0.6, 0.7, 0.1], vec![0.4, 0.6, 0.6], vec![1.0, 0.5, 0.5]]).unwrap()
    }

    /// Sparse d=10 data: first coordinate 1, others `U(0, 0.5)`.
    pub fn sparse10(seed: u64) -> Dataset {
        Dataset::sparse_random(seed, 4, 10, 0.5)
    }

    /// Random d=10 data with `U(0,1)` coordinates.
    pub fn random10(seed: u64) -> Dataset {
        Dataset::uniform_random(seed, 10, 10)
    }

    pub fn by_name(name: &str) -> Option<Dataset> {
        Some(match name {
            "unique-l1" => unique_l1(),
            "many-l1" => many_l1(),
            "kinked-path" => kinked_path(),
            "depth3-a" => depth3_a(),
            "depth3-b" => depth3_b(),
            "sparse10" => sparse10(0),
            "random10" => random10(0),
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_with_three_points() {
        let d = parse_json(r#"{"points": [[0.3,1.5,1],[1.5,3,1],[1,2.5,1]], "labels": [1,1,1]}"#).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.dim(), 3);
        assert_eq!(d.effective_points()[1], vec![1.5, 3.0, 1.0]);
    }

    #[test]
    fn negative_label_is_absorbed() {
        let d = parse_json(r#"{"points": [[2,0]], "labels": [-1]}"#).unwrap();
        assert_eq!(d.effective_points()[0], vec![-2.0, 0.0]);
        assert_eq!(d.points()[0], vec![2.0, 0.0]);
    }

    #[test]
    fn csv_label_zero_is_rejected() {
        let err = parse_csv("1.0,2.0,1\n0.5,0.5,0\n").unwrap_err();
        assert!(matches!(err, DataError::InvalidLabel { row: 1, .. }), "{err}");
    }

    #[test]
    fn csv_parses_rows_and_comments() {
        let d = parse_csv("# header\n1.0, 2.0, 1\n-0.5,0.5,-1\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.effective_points()[1], vec![0.5, -0.5]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = parse_csv("1,2,1\n1,1\n").unwrap_err();
        assert!(matches!(err, DataError::DimensionMismatch { row: 1, .. }));
        let err = parse_json(r#"{"points": [[1,2],[1]], "labels": [1,1]}"#).unwrap_err();
        assert!(matches!(err, DataError::DimensionMismatch { .. }));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let err = Dataset::new(vec![vec![f64::NAN]], vec![1]).unwrap_err();
        assert!(matches!(err, DataError::NonFinite { row: 0 }));
        let err = parse_csv("inf,1\n").unwrap_err();
        assert!(matches!(err, DataError::NonFinite { row: 0 }));
    }

    #[test]
    fn empty_is_rejected() {
        assert!(matches!(Dataset::new(vec![], vec![]), Err(DataError::Empty)));
    }

    #[test]
    fn stats_of_single_point() {
        let d = parse_json(r#"{"points": [[2,0]], "labels": [1]}"#).unwrap();
        let s = compute_stats(&d);
        assert!(s.separable);
        assert_eq!(s.xmax, 2.0);
        assert_eq!(s.xbar_per_coord, vec![2.0, 0.0]);
        assert_eq!(s.xbar, 2.0);
        assert!((s.gamma2 - 2.0).abs() < 1e-12);
        let w = s.witness.unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && w[1].abs() < 1e-12);
    }

    #[test]
    fn opposing_points_are_not_separable() {
        let d = Dataset::from_effective(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let s = compute_stats(&d);
        assert!(!s.separable);
        assert_eq!(s.gamma2, 0.0);
        assert!(s.witness.is_none());
        assert!(!d.is_separable());
    }

    #[test]
    fn generators_are_seeded() {
        let a = Dataset::uniform_random(7, 10, 10);
        let b = Dataset::uniform_random(7, 10, 10);
        assert_eq!(a.points(), b.points());
        let s = presets::sparse10(3);
        assert!(s.points().iter().all(|p| p[0] == 1.0 && p[1..].iter().all(|v| (0.0..0.5).contains(v))));
    }
}
