//! Independent reference implementations used by the integration tests.
//! Everything here is written the slow, obvious way on purpose.
#![allow(dead_code)]

use lamp_quality::{LabeledDataset, Matrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn naive_distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| points.iter().map(|q| euclid(p, q)).collect())
        .collect()
}

/// Per-point silhouette with nearest-instance separation, straight from the definition.
pub fn brute_silhouette(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let same: Vec<f64> = (0..n)
            .filter(|&j| j != i && labels[j] == labels[i])
            .map(|j| euclid(&points[i], &points[j]))
            .collect();
        if same.is_empty() {
            continue;
        }
        let a = same.iter().sum::<f64>() / same.len() as f64;
        let b = (0..n)
            .filter(|&j| labels[j] != labels[i])
            .map(|j| euclid(&points[i], &points[j]))
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / n as f64
}

/// k nearest neighbours by sorting every other point on (distance, index).
pub fn brute_knn(points: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    let d = naive_distances(points);
    (0..points.len())
        .map(|i| {
            let mut others: Vec<usize> = (0..points.len()).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| d[i][a].partial_cmp(&d[i][b]).unwrap().then(a.cmp(&b)));
            others.truncate(k);
            others
        })
        .collect()
}

pub fn brute_np(high: &[Vec<f64>], low: &[Vec<f64>], k: usize) -> f64 {
    let h = brute_knn(high, k);
    let l = brute_knn(low, k);
    let mut kept = 0usize;
    for (a, b) in h.iter().zip(&l) {
        let sa: std::collections::BTreeSet<_> = a.iter().collect();
        let sb: std::collections::BTreeSet<_> = b.iter().collect();
        kept += sa.intersection(&sb).count();
    }
    kept as f64 / (k * high.len()) as f64
}

/// Normal equations of the no-intercept fit, accumulated by triple loop.
pub fn triple_loop_normal(m: &[[f64; 3]], y: &[f64]) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (row, &t) in m.iter().zip(y) {
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += row[r] * row[c];
            }
            b[r] += row[r] * t;
        }
    }
    (a, b)
}

/// MAE, median (mean of the middle pair for even counts) and population std.
pub fn brute_stats(errors: &[f64]) -> (f64, f64, f64) {
    let n = errors.len() as f64;
    let mae = errors.iter().sum::<f64>() / n;
    let std = (errors.iter().map(|e| (e - mae).powi(2)).sum::<f64>() / n).sqrt();
    let mut s = errors.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if s.len() % 2 == 1 {
        s[s.len() / 2]
    } else {
        0.5 * (s[s.len() / 2 - 1] + s[s.len() / 2])
    };
    (mae, median, std)
}

pub fn dataset(points: &[Vec<f64>], labels: &[usize]) -> LabeledDataset {
    let features = Matrix::from_rows(points).unwrap();
    let labels = labels.iter().map(|l| format!("c{l}")).collect();
    let names = (0..points[0].len()).map(|j| format!("f{j}")).collect();
    LabeledDataset::new("synthetic", features, labels, names).unwrap()
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect())
        .collect()
}

/// Labels using exactly `classes` classes (requires `n >= classes`).
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, classes: usize) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n)
        .map(|i| {
            if i < classes {
                i
            } else {
                rng.gen_range(0..classes)
            }
        })
        .collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.gen_range(0..=i));
    }
    labels
}

fn gram_schmidt_basis(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= dot * qi;
                }
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(w.iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// Places `p` by brute-force search over 2D orthogonal maps.
///
/// Valid when the control points' affine hull is a plane: every candidate map
/// `Q R` (Q an orthonormal basis of that plane, R a rotation or reflection
/// sampled on a fine angle grid, then refined) is scored on the weighted
/// misfit and the best one is applied to `p`.
pub fn lamp_grid_oracle(p: &[f64], xs: &[Vec<f64>], ys: &[[f64; 2]]) -> [f64; 2] {
    for (x, y) in xs.iter().zip(ys) {
        if euclid(x, p) <= 1e-9 {
            return *y;
        }
    }
    let d = p.len();
    let alpha: Vec<f64> = xs
        .iter()
        .map(|x| 1.0 / (euclid(x, p).powi(2) + 1e-12))
        .collect();
    let asum: f64 = alpha.iter().sum();
    let xc: Vec<f64> = (0..d)
        .map(|k| xs.iter().zip(&alpha).map(|(x, a)| a * x[k]).sum::<f64>() / asum)
        .collect();
    let yc = [0, 1].map(|k| ys.iter().zip(&alpha).map(|(y, a)| a * y[k]).sum::<f64>() / asum);

    let diffs: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| x.iter().zip(&xs[0]).map(|(a, b)| a - b).collect())
        .collect();
    let q = gram_schmidt_basis(&diffs);
    assert_eq!(q.len(), 2, "oracle needs planar controls");
    let coords = |v: &[f64]| -> [f64; 2] {
        [0, 1].map(|j| {
            v.iter()
                .zip(&xc)
                .zip(&q[j])
                .map(|((vi, ci), qi)| (vi - ci) * qi)
                .sum()
        })
    };
    let xh: Vec<[f64; 2]> = xs.iter().map(|x| coords(x)).collect();
    let yh: Vec<[f64; 2]> = ys.iter().map(|y| [y[0] - yc[0], y[1] - yc[1]]).collect();

    // rows of R for angle t; `flip` mirrors the second axis
    let rmat = |t: f64, flip: bool| {
        let (s, c) = t.sin_cos();
        let f = if flip { -1.0 } else { 1.0 };
        [[c, s], [-s * f, c * f]]
    };
    let loss = |t: f64, flip: bool| -> f64 {
        let r = rmat(t, flip);
        xh.iter()
            .zip(&yh)
            .zip(&alpha)
            .map(|((x, y), a)| {
                let u = x[0] * r[0][0] + x[1] * r[1][0];
                let v = x[0] * r[0][1] + x[1] * r[1][1];
                a * ((u - y[0]).powi(2) + (v - y[1]).powi(2))
            })
            .sum()
    };

    let steps = 36_000;
    let tau = std::f64::consts::TAU;
    let mut best = (f64::INFINITY, 0.0, false);
    for flip in [false, true] {
        for i in 0..steps {
            let t = tau * i as f64 / steps as f64;
            let l = loss(t, flip);
            if l < best.0 {
                best = (l, t, flip);
            }
        }
    }
    let mut width = tau / steps as f64;
    for _ in 0..6 {
        let (_, centre, flip) = best;
        for i in -100..=100 {
            let t = centre + width * i as f64 / 100.0;
            let l = loss(t, flip);
            if l < best.0 {
                best = (l, t, flip);
            }
        }
        width /= 50.0;
    }
    let r = rmat(best.1, best.2);
    let pc = coords(p);
    [
        pc[0] * r[0][0] + pc[1] * r[1][0] + yc[0],
        pc[0] * r[0][1] + pc[1] * r[1][1] + yc[1],
    ]
}

/// Graded samples whose grades are exactly `w . m`.
pub fn planted_samples(rng: &mut ChaCha8Rng, n: usize, w: [f64; 3]) -> (Vec<[f64; 3]>, Vec<f64>) {
    let m: Vec<[f64; 3]> = (0..n)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(-2.0..2.0),
            ]
        })
        .collect();
    let y = m
        .iter()
        .map(|r| w[0] * r[0] + w[1] * r[1] + w[2] * r[2])
        .collect();
    (m, y)
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}
