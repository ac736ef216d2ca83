//! Fits metric weights to human grades by least squares and reports the
//! absolute-error statistics of a fit.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lu_solve, LinearSystem3};
use crate::metrics::{combined_metric, MetricVector, MetricWeights, DEFAULT_K};

/// Width of an error-histogram bin.
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.25;
/// Largest possible error between two grades in 1..=5.
pub const HISTOGRAM_MAX: f64 = 4.0;
pub const HISTOGRAM_BINS: usize = 16;

/// A projection's metrics together with the grade a person gave it.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedProjection {
    pub metrics: MetricVector,
    /// 1 (worst) to 5 (best).
    pub grade: u8,
    pub dataset: String,
    pub scale: String,
    pub seed: u64,
}

impl GradedProjection {
    pub fn new(metrics: MetricVector, grade: u8, dataset: impl Into<String>) -> Result<Self> {
        if !(1..=5).contains(&grade) {
            return Err(Error::InvalidArgument(format!(
                "grade {grade} outside 1..=5"
            )));
        }
        if !metrics.as_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("metrics must be finite".into()));
        }
        Ok(Self {
            metrics,
            grade,
            dataset: dataset.into(),
            scale: "raw".into(),
            seed: 0,
        })
    }

    fn target(&self) -> f64 {
        self.grade as f64
    }
}

/// Row layout of the graded-samples CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradedRecord {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub grade: u8,
    pub dataset: String,
    pub scale: String,
    pub seed: u64,
}

pub fn read_graded_csv<R: std::io::Read>(reader: R) -> Result<Vec<GradedProjection>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let rec: GradedRecord = rec?;
        let metrics = MetricVector {
            m1: rec.m1,
            m2: rec.m2,
            m3: rec.m3,
            k_used: DEFAULT_K,
        };
        let mut g = GradedProjection::new(metrics, rec.grade, rec.dataset)?;
        g.scale = rec.scale;
        g.seed = rec.seed;
        out.push(g);
    }
    Ok(out)
}

pub fn load_graded_csv(path: impl AsRef<Path>) -> Result<Vec<GradedProjection>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_graded_csv(file)
}

pub fn write_graded_csv<W: std::io::Write>(writer: W, samples: &[GradedProjection]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for s in samples {
        wtr.serialize(GradedRecord {
            m1: s.metrics.m1,
            m2: s.metrics.m2,
            m3: s.metrics.m3,
            grade: s.grade,
            dataset: s.dataset.clone(),
            scale: s.scale.clone(),
            seed: s.seed,
        })?;
    }
    wtr.flush().map_err(|e| Error::io("<grades>", e))?;
    Ok(())
}

/// Normal equations `(M^T M) w = M^T y` of the no-intercept fit of `y` on the
/// rows of `m`.
pub fn normal_system(m: &[[f64; 3]], y: &[f64]) -> Result<LinearSystem3> {
    if m.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} metric rows, {} targets",
            m.len(),
            y.len()
        )));
    }
    if m.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            available: m.len(),
        });
    }
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (row, &t) in m.iter().zip(y) {
        for j in 0..3 {
            for l in 0..3 {
                a[j][l] += row[j] * row[l];
            }
            b[j] += t * row[j];
        }
    }
    Ok(LinearSystem3::new(a, b))
}

/// Least-squares weights for real-valued targets.
pub fn least_squares_weights(m: &[[f64; 3]], y: &[f64]) -> Result<MetricWeights> {
    let [w1, w2, w3] = lu_solve(&normal_system(m, y)?)?;
    Ok(MetricWeights::new(w1, w2, w3))
}

/// Sum of squared residuals `(w . m_i - y_i)^2`.
pub fn residual_loss(m: &[[f64; 3]], y: &[f64], w: &MetricWeights) -> f64 {
    let w = w.as_array();
    m.iter()
        .zip(y)
        .map(|(row, t)| {
            let r = w[0] * row[0] + w[1] * row[1] + w[2] * row[2] - t;
            r * r
        })
        .sum()
}

fn design(samples: &[GradedProjection]) -> (Vec<[f64; 3]>, Vec<f64>) {
    samples
        .iter()
        .map(|s| (s.metrics.as_array(), s.target()))
        .unzip()
}

/// Normal equations for graded samples.
pub fn build_normal_system(samples: &[GradedProjection]) -> Result<LinearSystem3> {
    let (m, y) = design(samples);
    normal_system(&m, &y)
}

pub fn fit_weights(samples: &[GradedProjection]) -> Result<MetricWeights> {
    let (m, y) = design(samples);
    least_squares_weights(&m, &y)
}

/// Sum of squared residuals of `w` over `samples`.
pub fn squared_loss(samples: &[GradedProjection], w: &MetricWeights) -> f64 {
    let (m, y) = design(samples);
    residual_loss(&m, &y, w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTestSplit {
    pub train: Vec<GradedProjection>,
    pub test: Vec<GradedProjection>,
    pub seed: u64,
    pub ratio: f64,
}

impl TrainTestSplit {
    /// `(dataset, train, test)` counts, datasets in name order.
    pub fn counts_by_dataset(&self) -> Vec<(String, usize, usize)> {
        let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for s in &self.train {
            counts.entry(&s.dataset).or_default().0 += 1;
        }
        for s in &self.test {
            counts.entry(&s.dataset).or_default().1 += 1;
        }
        counts
            .into_iter()
            .map(|(name, (tr, te))| (name.to_string(), tr, te))
            .collect()
    }
}

fn check_split_args(n: usize, ratio: f64) -> Result<()> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ratio {ratio} must lie in (0, 1)"
        )));
    }
    if n < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            available: n,
        });
    }
    Ok(())
}

/// Seeded shuffle; the first `floor(ratio * n)` samples train.
pub fn split_train_test(
    samples: &[GradedProjection],
    ratio: f64,
    seed: u64,
) -> Result<TrainTestSplit> {
    check_split_args(samples.len(), ratio)?;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (ratio * samples.len() as f64).floor() as usize;
    Ok(TrainTestSplit {
        train: order[..cut].iter().map(|&i| samples[i].clone()).collect(),
        test: order[cut..].iter().map(|&i| samples[i].clone()).collect(),
        seed,
        ratio,
    })
}

/// Like [`split_train_test`] but applied within each dataset separately, so
/// every dataset is split at the same ratio.
pub fn split_train_test_by_dataset(
    samples: &[GradedProjection],
    ratio: f64,
    seed: u64,
) -> Result<TrainTestSplit> {
    check_split_args(samples.len(), ratio)?;
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        groups.entry(&s.dataset).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (_, mut idx) in groups {
        idx.shuffle(&mut rng);
        let cut = (ratio * idx.len() as f64).floor() as usize;
        train.extend(idx[..cut].iter().map(|&i| samples[i].clone()));
        test.extend(idx[cut..].iter().map(|&i| samples[i].clone()));
    }
    Ok(TrainTestSplit {
        train,
        test,
        seed,
        ratio,
    })
}

/// Absolute-error summary of a fitted metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorStats {
    pub mae: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
    pub max: f64,
    /// Counts over `[0, 4]` in bins of 0.25; larger errors land in the last bin.
    pub histogram: [usize; HISTOGRAM_BINS],
}

pub fn evaluate(samples: &[GradedProjection], w: &MetricWeights) -> Result<ErrorStats> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples {
            needed: 1,
            available: 0,
        });
    }
    let errors: Vec<f64> = samples
        .iter()
        .map(|s| (s.target() - combined_metric(&s.metrics, w)).abs())
        .collect();
    Ok(error_stats(&errors))
}

/// Summary statistics of nonnegative absolute errors.
pub fn error_stats(errors: &[f64]) -> ErrorStats {
    let n = errors.len() as f64;
    let mae = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mae) * (e - mae)).sum::<f64>() / n;
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    };
    let mut histogram = [0usize; HISTOGRAM_BINS];
    for &e in errors {
        let bin = ((e / HISTOGRAM_BIN_WIDTH).floor() as usize).min(HISTOGRAM_BINS - 1);
        histogram[bin] += 1;
    }
    ErrorStats {
        mae,
        median,
        std: var.sqrt(),
        max: sorted.last().copied().unwrap_or(0.0),
        histogram,
    }
}

/// Writes the `split,mae,median,std` table.
pub fn write_stats_csv<W: std::io::Write>(writer: W, rows: &[(&str, &ErrorStats)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["split", "mae", "median", "std"])?;
    for (split, s) in rows {
        wtr.write_record([
            split.to_string(),
            s.mae.to_string(),
            s.median.to_string(),
            s.std.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<stats>", e))?;
    Ok(())
}

/// Writes `split,bin_lo,bin_hi,count` rows.
pub fn write_histogram_csv<W: std::io::Write>(
    writer: W,
    rows: &[(&str, &ErrorStats)],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["split", "bin_lo", "bin_hi", "count"])?;
    for (split, s) in rows {
        for (b, count) in s.histogram.iter().enumerate() {
            let lo = b as f64 * HISTOGRAM_BIN_WIDTH;
            wtr.write_record([
                split.to_string(),
                lo.to_string(),
                (lo + HISTOGRAM_BIN_WIDTH).to_string(),
                count.to_string(),
            ])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<histogram>", e))?;
    Ok(())
}
