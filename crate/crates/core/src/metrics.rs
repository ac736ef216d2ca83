//! Projection quality: silhouette (`m1`), neighborhood preservation (`m2`),
//! silhouette ratio (`m3`) and their learned linear combination.

use serde::{Deserialize, Serialize};

use crate::dataset::{
    encode_labels, knn_indices, pairwise_distances, DistanceMatrix, LabeledDataset,
};
use crate::error::{Error, Result};
use crate::lamp::Projection2D;
use crate::linalg::Matrix;

/// Default neighbourhood size for `m2`.
pub const DEFAULT_K: usize = 7;

/// Original-space silhouettes at or below this magnitude make `m3` undefined.
pub const RATIO_DENOMINATOR_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    /// Silhouette of the projection.
    pub m1: f64,
    /// Neighborhood preservation.
    pub m2: f64,
    /// Projected over original silhouette.
    pub m3: f64,
    pub k_used: usize,
}

impl MetricVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.m1, self.m2, self.m3]
    }
}

/// Weights of the combined metric `w1 m1 + w2 m2 + w3 m3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl MetricWeights {
    /// Weights fitted to the published human grades.
    pub const PUBLISHED: MetricWeights = MetricWeights {
        w1: 5.7097,
        w2: 3.77416,
        w3: -0.0106,
    };

    pub fn new(w1: f64, w2: f64, w3: f64) -> Self {
        Self { w1, w2, w3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w1, self.w2, self.w3]
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let w: MetricWeights = serde_json::from_str(text)?;
        if !w.as_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite".into()));
        }
        Ok(w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weights serialize")
    }
}

impl Default for MetricWeights {
    fn default() -> Self {
        Self::PUBLISHED
    }
}

/// Mean silhouette over all instances.
///
/// Cohesion `a` is the mean distance to the rest of the instance's class;
/// separation `b` is the distance to the nearest instance of any other class.
/// Members of singleton classes contribute 0.
pub fn silhouette(distances: &DistanceMatrix, labels: &[usize]) -> Result<f64> {
    let n = distances.len();
    if labels.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{n} distance rows but {} labels",
            labels.len()
        )));
    }
    if labels.iter().all(|&l| Some(&l) == labels.first()) {
        return Err(Error::SingleClass);
    }
    let total: f64 = (0..n)
        .map(|x| {
            let row = distances.row(x);
            let mut same_sum = 0.0;
            let mut same_count = 0usize;
            let mut nearest_other = f64::INFINITY;
            for (y, (&dist, &ly)) in row.iter().zip(labels).enumerate() {
                if y == x {
                    continue;
                }
                if ly == labels[x] {
                    same_sum += dist;
                    same_count += 1;
                } else if dist < nearest_other {
                    nearest_other = dist;
                }
            }
            if same_count == 0 {
                return 0.0;
            }
            let a = same_sum / same_count as f64;
            let b = nearest_other;
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .sum();
    Ok(total / n as f64)
}

/// Mean fraction of each instance's `k` nearest neighbours that stay among its
/// `k` nearest neighbours in the other space.
pub fn neighborhood_preservation(
    high: &DistanceMatrix,
    low: &DistanceMatrix,
    k: usize,
) -> Result<f64> {
    if high.len() != low.len() {
        return Err(Error::ShapeMismatch(format!(
            "distance matrices cover {} and {} rows",
            high.len(),
            low.len()
        )));
    }
    let nn_high = knn_indices(high, k)?;
    let nn_low = knn_indices(low, k)?;
    let n = high.len();
    let kept: usize = nn_high
        .iter()
        .zip(&nn_low)
        .map(|(h, l)| h.iter().filter(|i| l.contains(i)).count())
        .sum();
    Ok(kept as f64 / (k * n) as f64)
}

/// `silhouette(low) / silhouette(high)`.
pub fn silhouette_ratio(
    high: &DistanceMatrix,
    low: &DistanceMatrix,
    labels: &[usize],
) -> Result<f64> {
    let original = silhouette(high, labels)?;
    if original.abs() <= RATIO_DENOMINATOR_EPS {
        return Err(Error::DegenerateDenominator(original));
    }
    Ok(silhouette(low, labels)? / original)
}

pub fn combined_metric(m: &MetricVector, w: &MetricWeights) -> f64 {
    w.w1 * m.m1 + w.w2 * m.m2 + w.w3 * m.m3
}

/// Scores a projection of `data` (already at the scale it was projected from).
pub fn score_projection(
    data: &LabeledDataset,
    proj: &Projection2D,
    k: usize,
    w: &MetricWeights,
) -> Result<(MetricVector, f64)> {
    score_coords(data, &proj.coords, k, w)
}

/// Scores bare `n x 2` coordinates row-aligned with `data`.
pub fn score_coords(
    data: &LabeledDataset,
    coords: &Matrix,
    k: usize,
    w: &MetricWeights,
) -> Result<(MetricVector, f64)> {
    if coords.nrows() != data.len() || coords.ncols() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "projection is {}x{}, dataset has {} rows",
            coords.nrows(),
            coords.ncols(),
            data.len()
        )));
    }
    let labels = encode_labels(&data.labels);
    let high = pairwise_distances(&data.features);
    let low = pairwise_distances(coords);
    score_distances(&high, &low, &labels, k, w)
}

/// Scores a projection given both distance matrices.
pub fn score_distances(
    high: &DistanceMatrix,
    low: &DistanceMatrix,
    labels: &[usize],
    k: usize,
    w: &MetricWeights,
) -> Result<(MetricVector, f64)> {
    let m1 = silhouette(low, labels)?;
    let m2 = neighborhood_preservation(high, low, k)?;
    let m3 = silhouette_ratio(high, low, labels)?;
    let m = MetricVector {
        m1,
        m2,
        m3,
        k_used: k,
    };
    Ok((m, combined_metric(&m, w)))
}

/// One row of the metric report CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReportRow {
    pub dataset: String,
    pub scale: String,
    pub seed: u64,
    pub k: usize,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub score: f64,
}

impl MetricReportRow {
    pub fn new(dataset: &str, scale: &str, seed: u64, m: &MetricVector, score: f64) -> Self {
        Self {
            dataset: dataset.to_string(),
            scale: scale.to_string(),
            seed,
            k: m.k_used,
            m1: m.m1,
            m2: m.m2,
            m3: m.m3,
            score,
        }
    }
}
