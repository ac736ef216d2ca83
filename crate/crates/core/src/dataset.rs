//! Dataset ingestion, min-max scaling, pairwise distances and k-NN indices.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A feature matrix with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub features: Matrix,
    pub labels: Vec<String>,
    pub feature_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = features.nrows();
        if n < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                available: n,
            });
        }
        if labels.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{n} rows but {} labels",
                labels.len()
            )));
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "{} columns but {} feature names",
                features.ncols(),
                feature_names.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            features,
            labels,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Distinct labels in order of first appearance.
    pub fn class_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for l in &self.labels {
            if !names.contains(l) {
                names.push(l.clone());
            }
        }
        names
    }

    /// Dense class ids, numbered by first appearance.
    pub fn class_ids(&self) -> Vec<usize> {
        encode_labels(&self.labels)
    }

    pub fn class_count(&self) -> usize {
        self.class_names().len()
    }
}

/// Maps labels to dense ids numbered by first appearance.
pub fn encode_labels<S: AsRef<str>>(labels: &[S]) -> Vec<usize> {
    let mut seen: Vec<&str> = Vec::new();
    labels
        .iter()
        .map(|l| {
            let l = l.as_ref();
            match seen.iter().position(|s| *s == l) {
                Some(id) => id,
                None => {
                    seen.push(l);
                    seen.len() - 1
                }
            }
        })
        .collect()
}

/// Target range of per-feature min-max scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleSpec {
    /// Features are used as loaded.
    Raw,
    /// Each feature is mapped onto `[0, s]`.
    MinMax(f64),
}

impl ScaleSpec {
    pub fn min_max(s: f64) -> Result<Self> {
        if s > 0.0 && s.is_finite() {
            Ok(ScaleSpec::MinMax(s))
        } else {
            Err(Error::InvalidArgument(format!(
                "scale must be positive, got {s}"
            )))
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            ScaleSpec::Raw => None,
            ScaleSpec::MinMax(s) => Some(*s),
        }
    }
}

impl fmt::Display for ScaleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleSpec::Raw => f.write_str("raw"),
            ScaleSpec::MinMax(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for ScaleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("raw") {
            return Ok(ScaleSpec::Raw);
        }
        let v: f64 = t.parse().map_err(|_| {
            Error::InvalidArgument(format!(
                "scale must be `raw` or a positive number, got {s:?}"
            ))
        })?;
        ScaleSpec::min_max(v)
    }
}

impl Serialize for ScaleSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ScaleSpec::Raw => serializer.serialize_str("raw"),
            ScaleSpec::MinMax(s) => serializer.serialize_f64(*s),
        }
    }
}

impl<'de> Deserialize<'de> for ScaleSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => ScaleSpec::min_max(v).map_err(serde::de::Error::custom),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Selects the label column by header name or by 0-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Loads a headed, comma-separated file; every non-label column must be numeric.
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, label, name)
}

/// Parses dataset CSV from any reader. Row numbers in errors are 1-based data rows.
pub fn read_csv<R: std::io::Read>(
    reader: R,
    label: &LabelColumn,
    name: impl Into<String>,
) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = match label {
        LabelColumn::Name(n) => headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| Error::MissingLabelColumn(n.clone()))?,
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Index(i) => return Err(Error::MissingLabelColumn(i.to_string())),
    };
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if j == label_idx {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: j,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: j,
                    value: cell.to_string(),
                });
            }
            values.push(v);
        }
    }
    let n = labels.len();
    if feature_names.is_empty() {
        return Err(Error::ShapeMismatch(
            "dataset has no feature columns".into(),
        ));
    }
    if n < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            available: n,
        });
    }
    let features = Matrix::new(n, feature_names.len(), values)?;
    LabeledDataset::new(name, features, labels, feature_names)
}

/// Per-feature min-max scaling onto `[0, s]`. Constant features map to 0.
pub fn minmax_scale(data: &LabeledDataset, spec: ScaleSpec) -> LabeledDataset {
    let s = match spec {
        ScaleSpec::Raw => return data.clone(),
        ScaleSpec::MinMax(s) => s,
    };
    let n = data.len();
    let d = data.dim();
    let mut out = data.clone();
    for j in 0..d {
        let col = data.features.column(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = hi - lo;
        for i in 0..n {
            out.features[(i, j)] = if range > 0.0 {
                // clamp guards the last ulp so the range stays inside [0, s]
                (s * ((col[i] - lo) / range)).clamp(0.0, s)
            } else {
                0.0
            };
        }
    }
    out
}

/// Symmetric matrix of Euclidean distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps raw `n x n` entries, checking symmetry, sign and diagonal.
    pub fn from_raw(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "distance matrix of size {n} needs {} entries",
                n * n
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::DegenerateData(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !(v >= 0.0 && v.is_finite()) || (v - data[j * n + i]).abs() > 1e-12 {
                    return Err(Error::DegenerateData(format!(
                        "invalid distance at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Euclidean distances between all pairs of rows.
pub fn pairwise_distances(features: &Matrix) -> DistanceMatrix {
    let n = features.nrows();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = features.row(i);
            (0..n)
                .map(|j| {
                    if i == j {
                        return 0.0;
                    }
                    // always accumulate from the lower index so d(i,j) == d(j,i) bitwise
                    let (p, q) = if i < j {
                        (a, features.row(j))
                    } else {
                        (features.row(j), a)
                    };
                    p.iter()
                        .zip(q)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect();
    DistanceMatrix {
        n,
        data: rows.concat(),
    }
}

/// For each row, the `k` nearest other rows; ties go to the lower index.
pub fn knn_indices(distances: &DistanceMatrix, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = distances.len();
    if k == 0 || k + 1 > n {
        return Err(Error::InvalidK {
            k,
            max: n.saturating_sub(1),
        });
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let row = distances.row(i);
            let mut idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let cmp = |a: &usize, b: &usize| row[*a].total_cmp(&row[*b]).then(a.cmp(b));
            if k < idx.len() {
                idx.select_nth_unstable_by(k - 1, cmp);
                idx.truncate(k);
            }
            idx.sort_by(cmp);
            idx
        })
        .collect())
}
