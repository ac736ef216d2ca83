//! Local Affine Multidimensional Projection.
//!
//! Every instance gets its own orthogonal affine map, fitted by weighted
//! orthogonal Procrustes against a set of control points whose 2D positions
//! (anchors) are known. The map is evaluated at the instance itself.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{encode_labels, minmax_scale, LabeledDataset, ScaleSpec};
use crate::error::{Error, Result};
use crate::linalg::{pca_top2, thin_svd_tall, Matrix};

/// Added to squared distances before inverting them into weights.
pub const WEIGHT_EPS: f64 = 1e-12;
/// Instances this close to a control point take its anchor verbatim.
pub const CONTROL_SNAP_EPS: f64 = 1e-9;
/// Singular values at or below this count as vanished.
pub const RANK_EPS: f64 = 1e-14;

/// Control points: row indices into the dataset and their 2D anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPointSet {
    pub indices: Vec<usize>,
    /// `indices.len() x 2`
    pub anchors: Matrix,
    pub source_dim: usize,
}

impl ControlPointSet {
    pub fn new(indices: Vec<usize>, anchors: Matrix, source_dim: usize) -> Result<Self> {
        if indices.len() < 3 {
            return Err(Error::TooFewPoints {
                needed: 3,
                available: indices.len(),
            });
        }
        if anchors.nrows() != indices.len() || anchors.ncols() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "{} control indices but {}x{} anchors",
                indices.len(),
                anchors.nrows(),
                anchors.ncols()
            )));
        }
        let distinct: BTreeSet<_> = indices.iter().collect();
        if distinct.len() != indices.len() {
            return Err(Error::InvalidArgument(
                "control indices must be distinct".into(),
            ));
        }
        Ok(Self {
            indices,
            anchors,
            source_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Same controls with every anchor mapped through `f`.
    pub fn map_anchors(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let mut anchors = self.anchors.clone();
        for i in 0..anchors.nrows() {
            let [x, y] = f([anchors[(i, 0)], anchors[(i, 1)]]);
            anchors[(i, 0)] = x;
            anchors[(i, 1)] = y;
        }
        Self {
            anchors,
            ..self.clone()
        }
    }
}

/// 2D coordinates row-aligned with a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D {
    /// `n x 2`
    pub coords: Matrix,
    pub dataset_name: String,
    pub scale_used: ScaleSpec,
    pub control: ControlPointSet,
    pub seed: u64,
}

/// `ceil(sqrt(n))`, raised to at least three and one per class, capped at `n`.
pub fn default_control_count(n: usize, classes: usize) -> usize {
    let root = (n as f64).sqrt().ceil() as usize;
    root.max(3).max(classes).min(n)
}

/// Stratified, seeded choice of control rows, returned in ascending order.
///
/// Each class receives a share proportional to its size (largest-remainder
/// rounding), and at least one point when `count` covers every class.
pub fn select_control_points(data: &LabeledDataset, count: usize, seed: u64) -> Result<Vec<usize>> {
    let n = data.len();
    if count < 3 || count > n {
        return Err(Error::TooFewPoints {
            needed: count.max(3),
            available: n,
        });
    }
    let ids = encode_labels(&data.labels);
    let classes = ids.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (row, &c) in ids.iter().enumerate() {
        members[c].push(row);
    }

    let quota: Vec<f64> = members
        .iter()
        .map(|m| count as f64 * m.len() as f64 / n as f64)
        .collect();
    let floor_one = count >= classes;
    let mut alloc: Vec<usize> = quota
        .iter()
        .zip(&members)
        .map(|(&q, m)| {
            let base = q.floor() as usize;
            let base = if floor_one { base.max(1) } else { base };
            base.min(m.len())
        })
        .collect();

    let mut total: usize = alloc.iter().sum();
    while total > count {
        // take from the class furthest above its quota
        let c = (0..classes)
            .filter(|&c| alloc[c] > usize::from(floor_one))
            .max_by(|&a, &b| {
                (alloc[a] as f64 - quota[a])
                    .total_cmp(&(alloc[b] as f64 - quota[b]))
                    .then(b.cmp(&a))
            })
            .expect("some class can give up a point");
        alloc[c] -= 1;
        total -= 1;
    }
    while total < count {
        let c = (0..classes)
            .filter(|&c| alloc[c] < members[c].len())
            .max_by(|&a, &b| {
                (quota[a] - alloc[a] as f64)
                    .total_cmp(&(quota[b] - alloc[b] as f64))
                    .then(b.cmp(&a))
            })
            .expect("count <= n leaves room");
        alloc[c] += 1;
        total += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(count);
    for (m, &take) in members.iter().zip(&alloc) {
        let mut pool = m.clone();
        pool.shuffle(&mut rng);
        chosen.extend_from_slice(&pool[..take]);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Anchors the given rows at the PCA layout of their own features.
pub fn seed_control_projection(
    data: &LabeledDataset,
    indices: &[usize],
) -> Result<ControlPointSet> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= data.len()) {
        return Err(Error::InvalidArgument(format!(
            "control index {bad} out of range for {} rows",
            data.len()
        )));
    }
    let subset = data.features.select_rows(indices);
    let anchors = pca_top2(&subset)?;
    ControlPointSet::new(indices.to_vec(), anchors, data.dim())
}

/// The orthogonal affine map fitted for one instance:
/// `f(p) = (p - x_centroid) m + y_centroid`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMapping {
    pub x_centroid: Vec<f64>,
    pub y_centroid: [f64; 2],
    /// `d x 2` with orthonormal columns.
    pub m: Matrix,
}

impl LocalMapping {
    pub fn apply(&self, p: &[f64]) -> [f64; 2] {
        let mut out = self.y_centroid;
        for (k, (&pk, &ck)) in p.iter().zip(&self.x_centroid).enumerate() {
            let dk = pk - ck;
            out[0] += dk * self.m[(k, 0)];
            out[1] += dk * self.m[(k, 1)];
        }
        out
    }

    /// `max |m^T m - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.m.nrows();
        let mut err: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let g: f64 = (0..d).map(|k| self.m[(k, a)] * self.m[(k, b)]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                err = err.max((g - target).abs());
            }
        }
        err
    }
}

/// How one instance is placed.
#[derive(Debug, Clone, PartialEq)]
pub enum PointMapping {
    /// The instance sits on control point `i` (position in the control list).
    Anchor(usize),
    Affine(LocalMapping),
}

/// Fits the local map for `p` against controls `xs` (`m x d`) anchored at `ys` (`m x 2`).
pub fn local_mapping(p: &[f64], xs: &Matrix, ys: &Matrix) -> Result<PointMapping> {
    let d = xs.ncols();
    if d < 2 {
        return Err(Error::ShapeMismatch(
            "projection needs at least two source dimensions".into(),
        ));
    }
    let snap2 = CONTROL_SNAP_EPS * CONTROL_SNAP_EPS;
    let mut alphas = Vec::with_capacity(xs.nrows());
    for (i, x) in xs.rows_iter().enumerate() {
        let d2: f64 = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 <= snap2 {
            return Ok(PointMapping::Anchor(i));
        }
        alphas.push(1.0 / (d2 + WEIGHT_EPS));
    }
    let alpha_sum: f64 = alphas.iter().sum();

    let mut x_centroid = vec![0.0; d];
    let mut y_centroid = [0.0; 2];
    for (i, &a) in alphas.iter().enumerate() {
        for (c, x) in x_centroid.iter_mut().zip(xs.row(i)) {
            *c += a * x;
        }
        y_centroid[0] += a * ys[(i, 0)];
        y_centroid[1] += a * ys[(i, 1)];
    }
    for c in x_centroid.iter_mut() {
        *c /= alpha_sum;
    }
    y_centroid[0] /= alpha_sum;
    y_centroid[1] /= alpha_sum;

    // A^T B with rows sqrt(a) (x - x~) and sqrt(a) (y - y~)
    let mut cross = Matrix::zeros(d, 2);
    for (i, &a) in alphas.iter().enumerate() {
        let yh = [ys[(i, 0)] - y_centroid[0], ys[(i, 1)] - y_centroid[1]];
        for (k, (&x, &c)) in xs.row(i).iter().zip(&x_centroid).enumerate() {
            let xh = a * (x - c);
            cross[(k, 0)] += xh * yh[0];
            cross[(k, 1)] += xh * yh[1];
        }
    }
    let svd = thin_svd_tall(&cross)?;
    if svd.s[0] <= RANK_EPS {
        return Err(Error::RankCollapse { row: usize::MAX });
    }
    Ok(PointMapping::Affine(LocalMapping {
        x_centroid,
        y_centroid,
        m: svd.polar_factor(),
    }))
}

fn control_matrices(data: &LabeledDataset, control: &ControlPointSet) -> Result<Matrix> {
    if control.source_dim != data.dim() {
        return Err(Error::ShapeMismatch(format!(
            "controls live in {} dimensions, data in {}",
            control.source_dim,
            data.dim()
        )));
    }
    if let Some(&bad) = control.indices.iter().find(|&&i| i >= data.len()) {
        return Err(Error::InvalidArgument(format!(
            "control index {bad} out of range"
        )));
    }
    Ok(data.features.select_rows(&control.indices))
}

/// Per-row mappings used by [`lamp_project`], in row order.
pub fn lamp_mappings(
    data: &LabeledDataset,
    control: &ControlPointSet,
) -> Result<Vec<PointMapping>> {
    let xs = control_matrices(data, control)?;
    (0..data.len())
        .into_par_iter()
        .map(|row| {
            local_mapping(data.features.row(row), &xs, &control.anchors).map_err(|e| match e {
                Error::RankCollapse { .. } => Error::RankCollapse { row },
                other => other,
            })
        })
        .collect()
}

/// Projects every row through its own local orthogonal map.
pub fn lamp_project(data: &LabeledDataset, control: &ControlPointSet) -> Result<Projection2D> {
    let mappings = lamp_mappings(data, control)?;
    let mut coords = Matrix::zeros(data.len(), 2);
    for (row, mapping) in mappings.iter().enumerate() {
        let [x, y] = match mapping {
            PointMapping::Anchor(i) => [control.anchors[(*i, 0)], control.anchors[(*i, 1)]],
            PointMapping::Affine(m) => m.apply(data.features.row(row)),
        };
        coords[(row, 0)] = x;
        coords[(row, 1)] = y;
    }
    Ok(Projection2D {
        coords,
        dataset_name: data.name.clone(),
        scale_used: ScaleSpec::Raw,
        control: control.clone(),
        seed: 0,
    })
}

/// Scale at which default anchors are laid out.
pub const REFERENCE_SCALE: f64 = 1.0;

/// Settings for [`project_at_scale`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionConfig {
    pub scale: ScaleSpec,
    /// Defaults to [`default_control_count`].
    pub controls: Option<usize>,
    pub seed: u64,
    /// Replaces the default control set and its anchors.
    pub anchors: Option<ControlPointSet>,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            scale: ScaleSpec::Raw,
            controls: None,
            seed: 0,
            anchors: None,
        }
    }
}

/// Default control set for `data`: seeded stratified rows, anchored at the PCA
/// layout of those rows after min-max scaling to [`REFERENCE_SCALE`].
///
/// The anchors therefore sit in a fixed visual frame regardless of the scale
/// the data is later projected at.
pub fn default_controls(
    data: &LabeledDataset,
    count: Option<usize>,
    seed: u64,
) -> Result<ControlPointSet> {
    let count = count.unwrap_or_else(|| default_control_count(data.len(), data.class_count()));
    let indices = select_control_points(data, count, seed)?;
    let reference = minmax_scale(data, ScaleSpec::MinMax(REFERENCE_SCALE));
    seed_control_projection(&reference, &indices)
}

/// Scales the raw dataset and projects it. Returns the scaled data alongside
/// the projection, since quality is measured against the scaled features.
pub fn project_at_scale(
    raw: &LabeledDataset,
    config: &ProjectionConfig,
) -> Result<(LabeledDataset, Projection2D)> {
    let control = match &config.anchors {
        Some(c) => c.clone(),
        None => default_controls(raw, config.controls, config.seed)?,
    };
    let scaled = minmax_scale(raw, config.scale);
    let mut proj = lamp_project(&scaled, &control)?;
    proj.scale_used = config.scale;
    proj.seed = config.seed;
    Ok((scaled, proj))
}

#[derive(Debug, Serialize, Deserialize)]
struct AnchorRecord {
    index: usize,
    x: f64,
    y: f64,
}

/// Reads an `index,x,y` anchors file into a control set for `source_dim`-dimensional data.
pub fn read_anchors_csv<R: std::io::Read>(reader: R, source_dim: usize) -> Result<ControlPointSet> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut indices = Vec::new();
    let mut coords = Vec::new();
    for rec in rdr.deserialize() {
        let rec: AnchorRecord = rec?;
        indices.push(rec.index);
        coords.push([rec.x, rec.y]);
    }
    let anchors = Matrix::from_rows(&coords).map_err(|_| Error::TooFewPoints {
        needed: 3,
        available: 0,
    })?;
    ControlPointSet::new(indices, anchors, source_dim)
}

pub fn load_anchors_csv(path: impl AsRef<Path>, source_dim: usize) -> Result<ControlPointSet> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_anchors_csv(file, source_dim)
}

pub fn write_anchors_csv<W: std::io::Write>(writer: W, control: &ControlPointSet) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (i, &index) in control.indices.iter().enumerate() {
        wtr.serialize(AnchorRecord {
            index,
            x: control.anchors[(i, 0)],
            y: control.anchors[(i, 1)],
        })?;
    }
    wtr.flush().map_err(|e| Error::io("<anchors>", e))?;
    Ok(())
}

/// One row of a projection CSV (`row,x,y,label`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub row: usize,
    pub x: f64,
    pub y: f64,
    pub label: String,
}

pub fn write_projection_csv<W: std::io::Write>(
    writer: W,
    proj: &Projection2D,
    labels: &[String],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (row, (xy, label)) in proj.coords.rows_iter().zip(labels).enumerate() {
        wtr.serialize(ProjectedPoint {
            row,
            x: xy[0],
            y: xy[1],
            label: label.clone(),
        })?;
    }
    wtr.flush().map_err(|e| Error::io("<projection>", e))?;
    Ok(())
}

/// Reads projection rows, sorted by `row`.
pub fn read_projection_csv<R: std::io::Read>(reader: R) -> Result<Vec<ProjectedPoint>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut points: Vec<ProjectedPoint> =
        rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    points.sort_by_key(|p| p.row);
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(Error::DegenerateData(
            "non-finite projection coordinate".into(),
        ));
    }
    Ok(points)
}

pub fn load_projection_csv(path: impl AsRef<Path>) -> Result<Vec<ProjectedPoint>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_projection_csv(file)
}
