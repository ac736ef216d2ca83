//! Scale autotuning: project the dataset at each scale on a grid, score each
//! projection with the learned metric, keep the best.
//!
//! One control set is chosen per sweep (see [`default_controls`]) and reused
//! at every scale, so score differences come from the scale alone.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{encode_labels, minmax_scale, pairwise_distances, LabeledDataset, ScaleSpec};
use crate::error::{Error, Result};
use crate::lamp::{default_controls, lamp_project, ControlPointSet, Projection2D};
use crate::metrics::{score_distances, MetricVector, MetricWeights, DEFAULT_K};

/// Arithmetic grid `a + j (b - a) / (steps - 1)`, endpoints included.
///
/// When the step is far above floating-point resolution, interior points are
/// rounded to 12 significant digits so `0.1..1` yields `0.3` rather than
/// `0.30000000000000004`.
pub fn uniform_scales(a: f64, b: f64, steps: usize) -> Result<Vec<ScaleSpec>> {
    if !(a > 0.0 && a < b && b.is_finite()) || steps < 2 {
        return Err(Error::InvalidInterval { a, b, steps });
    }
    let step = (b - a) / (steps - 1) as f64;
    let tidy = step > 1e-9 * b;
    Ok((0..steps)
        .map(|j| {
            if j == 0 {
                ScaleSpec::MinMax(a)
            } else if j == steps - 1 {
                ScaleSpec::MinMax(b)
            } else {
                let v = a + j as f64 * step;
                ScaleSpec::MinMax(if tidy { round_sig(v) } else { v })
            }
        })
        .collect())
}

fn round_sig(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Powers of ten from `10^lo` to `10^hi`.
pub fn decade_scales(lo: i32, hi: i32) -> Vec<ScaleSpec> {
    (lo..=hi)
        .map(|e| ScaleSpec::MinMax(10f64.powi(e)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub a: f64,
    pub b: f64,
    pub steps: usize,
    pub k: usize,
    pub weights: MetricWeights,
    pub seed: u64,
    pub include_raw: bool,
    /// Defaults to the projection default for the dataset.
    pub controls: Option<usize>,
}

impl SweepConfig {
    pub fn new(a: f64, b: f64, steps: usize) -> Self {
        Self {
            a,
            b,
            steps,
            k: DEFAULT_K,
            weights: MetricWeights::PUBLISHED,
            seed: 0,
            include_raw: false,
            controls: None,
        }
    }

    /// The grid this config sweeps, with `raw` appended when requested.
    pub fn scales(&self) -> Result<Vec<ScaleSpec>> {
        let mut scales = uniform_scales(self.a, self.b, self.steps)?;
        if self.include_raw {
            scales.push(ScaleSpec::Raw);
        }
        Ok(scales)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub scale: ScaleSpec,
    #[serde(flatten)]
    pub metrics: MetricVector,
    pub score: f64,
}

/// Scores in grid order and the position of the best one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub entries: Vec<SweepEntry>,
    pub best_index: usize,
}

impl SweepTable {
    /// Builds a table, picking the first maximal score.
    pub fn from_entries(entries: Vec<SweepEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("sweep produced no entries".into()));
        }
        let mut best_index = 0;
        for (i, e) in entries.iter().enumerate() {
            if e.score > entries[best_index].score {
                best_index = i;
            }
        }
        Ok(Self {
            entries,
            best_index,
        })
    }

    pub fn best(&self) -> &SweepEntry {
        &self.entries[self.best_index]
    }
}

pub fn best_scale(table: &SweepTable) -> ScaleSpec {
    table.best().scale
}

/// Projects and scores `data` at one scale against a fixed control set.
pub fn evaluate_scale(
    data: &LabeledDataset,
    control: &ControlPointSet,
    scale: ScaleSpec,
    k: usize,
    weights: &MetricWeights,
    seed: u64,
) -> Result<(Projection2D, SweepEntry)> {
    let scaled = minmax_scale(data, scale);
    let mut proj = lamp_project(&scaled, control)?;
    proj.scale_used = scale;
    proj.seed = seed;
    let labels = encode_labels(&data.labels);
    let high = pairwise_distances(&scaled.features);
    let low = pairwise_distances(&proj.coords);
    let (metrics, score) = score_distances(&high, &low, &labels, k, weights)?;
    Ok((
        proj,
        SweepEntry {
            scale,
            metrics,
            score,
        },
    ))
}

/// Evaluates an explicit list of scales. Entries keep list order.
pub fn sweep_scales(
    data: &LabeledDataset,
    scales: &[ScaleSpec],
    control: &ControlPointSet,
    k: usize,
    weights: &MetricWeights,
    seed: u64,
) -> Result<(SweepTable, Vec<Projection2D>)> {
    let results: Vec<(Projection2D, SweepEntry)> = scales
        .par_iter()
        .map(|&s| evaluate_scale(data, control, s, k, weights, seed))
        .collect::<Result<_>>()?;
    let (projections, entries): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((SweepTable::from_entries(entries)?, projections))
}

/// Runs the scale sweep described by `config`.
pub fn sweep(data: &LabeledDataset, config: &SweepConfig) -> Result<SweepTable> {
    sweep_with_projections(data, config).map(|(t, _)| t)
}

pub fn sweep_with_projections(
    data: &LabeledDataset,
    config: &SweepConfig,
) -> Result<(SweepTable, Vec<Projection2D>)> {
    let scales = config.scales()?;
    let control = default_controls(data, config.controls, config.seed)?;
    sweep_scales(
        data,
        &scales,
        &control,
        config.k,
        &config.weights,
        config.seed,
    )
}

/// Outcome of a decade sweep followed by a uniform refinement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoarseFineResult {
    pub coarse: SweepTable,
    pub fine: SweepTable,
    /// Interval refined in the second pass.
    pub refined: (f64, f64),
    pub best_scale: ScaleSpec,
    pub best_score: f64,
}

/// Sweeps the decades `10^-2 .. 10^2`, then samples `fine_steps` scales
/// uniformly between the best decade and its better-scoring neighbour.
pub fn coarse_to_fine(
    data: &LabeledDataset,
    k: usize,
    weights: &MetricWeights,
    seed: u64,
    controls: Option<usize>,
    fine_steps: usize,
) -> Result<CoarseFineResult> {
    let control = default_controls(data, controls, seed)?;
    let decades = decade_scales(-2, 2);
    let (coarse, _) = sweep_scales(data, &decades, &control, k, weights, seed)?;

    let i = coarse.best_index;
    let last = coarse.entries.len() - 1;
    let neighbour = match (i.checked_sub(1), (i < last).then_some(i + 1)) {
        (Some(lo), Some(hi)) => {
            if coarse.entries[hi].score > coarse.entries[lo].score {
                hi
            } else {
                lo
            }
        }
        (Some(lo), None) => lo,
        (None, Some(hi)) => hi,
        (None, None) => i,
    };
    let (lo, hi) = (i.min(neighbour), i.max(neighbour));
    let a = coarse.entries[lo]
        .scale
        .value()
        .expect("decades are numeric");
    let b = coarse.entries[hi]
        .scale
        .value()
        .expect("decades are numeric");
    let fine_scales = uniform_scales(a, b, fine_steps)?;
    let (fine, _) = sweep_scales(data, &fine_scales, &control, k, weights, seed)?;

    // equal scores resolve to the smaller scale
    let (f, c) = (fine.best(), coarse.best());
    let fine_wins = f.score > c.score || (f.score == c.score && f.scale.value() < c.scale.value());
    let (best_scale, best_score) = if fine_wins {
        (f.scale, f.score)
    } else {
        (c.scale, c.score)
    };
    Ok(CoarseFineResult {
        coarse,
        fine,
        refined: (a, b),
        best_scale,
        best_score,
    })
}

/// JSON layout of a sweep report.
#[derive(Debug, Serialize)]
pub struct SweepReport<'a> {
    pub dataset: &'a str,
    pub config: &'a SweepConfig,
    pub entries: Vec<ReportEntry>,
    pub best_scale: ScaleSpec,
    pub best_score: f64,
}

#[derive(Debug, Serialize)]
pub struct ReportEntry {
    pub scale: ScaleSpec,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub score: f64,
}

impl From<&SweepEntry> for ReportEntry {
    fn from(e: &SweepEntry) -> Self {
        Self {
            scale: e.scale,
            m1: e.metrics.m1,
            m2: e.metrics.m2,
            m3: e.metrics.m3,
            score: e.score,
        }
    }
}

impl<'a> SweepReport<'a> {
    pub fn new(dataset: &'a str, config: &'a SweepConfig, table: &SweepTable) -> Self {
        Self {
            dataset,
            config,
            entries: table.entries.iter().map(ReportEntry::from).collect(),
            best_scale: best_scale(table),
            best_score: table.best().score,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
