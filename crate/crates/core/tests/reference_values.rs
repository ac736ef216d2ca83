mod common;

use common::*;
use lamp_quality::dataset::{read_csv, DistanceMatrix};
use lamp_quality::lamp::{load_anchors_csv, write_anchors_csv};
use lamp_quality::metrics::{combined_metric, score_coords, score_projection};
use lamp_quality::trainer::{build_normal_system, error_stats};
use lamp_quality::tuner::sweep_scales;
use lamp_quality::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn label() -> LabelColumn {
    LabelColumn::Name("class".into())
}

fn iris() -> LabeledDataset {
    load_csv(data_path("iris.csv"), &label()).unwrap()
}

fn wine() -> LabeledDataset {
    load_csv(data_path("wine.csv"), &label()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn svd_of_diagonal_and_rotation() {
    let svd =
        thin_svd_tall(&Matrix::from_rows(&[[3.0, 0.0], [0.0, 2.0], [0.0, 0.0]]).unwrap()).unwrap();
    assert!(close(svd.s[0], 3.0, 1e-15) && close(svd.s[1], 2.0, 1e-15));
    let (s, c) = (30f64.to_radians()).sin_cos();
    let svd = thin_svd_tall(&Matrix::from_rows(&[[c, -s], [s, c]]).unwrap()).unwrap();
    assert!(close(svd.s[0], 1.0, 1e-14) && close(svd.s[1], 1.0, 1e-14));
}

#[test]
fn pca_on_aligned_and_collinear_points() {
    // centred, diagonal covariance: only axis signs may change
    let pts = [[2.0, 0.0], [-2.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
    let y = pca_top2(&Matrix::from_rows(&pts).unwrap()).unwrap();
    for (i, p) in pts.iter().enumerate() {
        assert!(close(y[(i, 0)].abs(), p[0].abs(), 1e-12));
        assert!(close(y[(i, 1)].abs(), p[1].abs(), 1e-12));
    }
    let line: Vec<[f64; 3]> = (0..6)
        .map(|t| [t as f64, 2.0 * t as f64 - 1.0, 0.5 * t as f64])
        .collect();
    let y = pca_top2(&Matrix::from_rows(&line).unwrap()).unwrap();
    assert!(y.column(1).iter().all(|v| v.abs() <= 1e-10));
}

#[test]
fn bundled_datasets_have_expected_shapes() {
    let i = iris();
    assert_eq!((i.len(), i.dim(), i.class_count()), (150, 4, 3));
    let w = wine();
    assert_eq!((w.len(), w.dim(), w.class_count()), (178, 13, 3));
    for (name, n, d, k) in [
        ("vehicle_synthetic.csv", 846, 19, 4),
        ("segmentation_synthetic.csv", 2100, 19, 7),
        ("fish_synthetic.csv", 159, 7, 7),
    ] {
        let data = load_csv(data_path(name), &label()).unwrap();
        assert_eq!(
            (data.len(), data.dim(), data.class_count()),
            (n, d, k),
            "{name}"
        );
    }
    let tiny = read_csv("x,class\n1.5,a\n2.5,b\n".as_bytes(), &label(), "tiny").unwrap();
    assert_eq!((tiny.len(), tiny.dim()), (2, 1));
}

#[test]
fn minmax_examples() {
    let d = read_csv("x,class\n0,a\n5,a\n10,b\n".as_bytes(), &label(), "t").unwrap();
    assert_eq!(
        minmax_scale(&d, ScaleSpec::MinMax(1.0)).features.column(0),
        vec![0.0, 0.5, 1.0]
    );

    let fixed = read_csv("x,y,class\n0,2,a\n2,0,b\n1,1,a\n".as_bytes(), &label(), "t").unwrap();
    let again = minmax_scale(&fixed, ScaleSpec::MinMax(2.0));
    for (a, b) in again
        .features
        .as_slice()
        .iter()
        .zip(fixed.features.as_slice())
    {
        assert!(close(*a, *b, 1e-12));
    }

    let scaled = minmax_scale(&wine(), ScaleSpec::MinMax(0.2));
    for j in 0..scaled.dim() {
        let col = scaled.features.column(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            close(lo, 0.0, 1e-12) && close(hi, 0.2, 1e-12),
            "feature {j}: [{lo}, {hi}]"
        );
    }
}

#[test]
fn distance_examples() {
    let d = pairwise_distances(&Matrix::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap());
    assert_eq!(d.get(0, 1), 5.0);
    let same = pairwise_distances(&Matrix::from_rows(&[[1.0, 2.0, 3.0]; 4]).unwrap());
    assert!((0..4).all(|i| same.row(i).iter().all(|&v| v == 0.0)));

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pts = random_points(&mut rng, 6, 3);
    let d = pairwise_distances(&Matrix::from_rows(&pts).unwrap());
    let naive = naive_distances(&pts);
    for i in 0..6 {
        for j in 0..6 {
            // naive sums the same terms; the lower index leads
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            assert_eq!(d.get(i, j), naive[a][b]);
        }
    }
}

#[test]
fn knn_examples() {
    let line = pairwise_distances(&Matrix::from_rows(&[[0.0], [1.0], [10.0]]).unwrap());
    assert_eq!(
        knn_indices(&line, 1).unwrap(),
        vec![vec![1], vec![0], vec![1]]
    );

    let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let nn = knn_indices(&pairwise_distances(&Matrix::from_rows(&square).unwrap()), 2).unwrap();
    assert_eq!(nn, vec![vec![1, 3], vec![0, 2], vec![1, 3], vec![0, 2]]);

    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let pts = random_points(&mut rng, 8, 3);
    let nn = knn_indices(&pairwise_distances(&Matrix::from_rows(&pts).unwrap()), 3).unwrap();
    assert_eq!(nn, brute_knn(&pts, 3));
}

#[test]
fn control_selection_examples() {
    let data = iris();
    assert_eq!(
        select_control_points(&data, 150, 5).unwrap(),
        (0..150).collect::<Vec<_>>()
    );
    let picked = select_control_points(&data, 12, 7).unwrap();
    let mut tally = std::collections::BTreeMap::new();
    for &i in &picked {
        *tally.entry(data.labels[i].as_str()).or_insert(0) += 1;
    }
    assert_eq!(tally.values().copied().collect::<Vec<_>>(), vec![4, 4, 4]);
    assert_eq!(picked, select_control_points(&data, 12, 7).unwrap());
}

#[test]
fn seeded_anchors_are_congruent_to_a_triangle() {
    // a triangle embedded in a tilted plane of R^5
    let tri = [[0.0, 0.0], [4.0, 0.0], [1.0, 3.0]];
    let u = [0.6, 0.0, 0.8, 0.0, 0.0];
    let v = [0.0, 0.6, 0.0, 0.0, -0.8];
    let rows: Vec<Vec<f64>> = tri
        .iter()
        .map(|p| (0..5).map(|k| p[0] * u[k] + p[1] * v[k] + 1.0).collect())
        .collect();
    let data = dataset(&rows, &[0, 1, 2]);
    let c = seed_control_projection(&data, &[0, 1, 2]).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let want = euclid(&tri[i], &tri[j]);
            let got = euclid(c.anchors.row(i), c.anchors.row(j));
            assert!(close(got, want, 1e-9), "{i}-{j}: {got} vs {want}");
        }
    }

    let line: Vec<Vec<f64>> = (0..4)
        .map(|t| vec![t as f64, 2.0 * t as f64, -(t as f64)])
        .collect();
    let c = seed_control_projection(&dataset(&line, &[0, 0, 1, 1]), &[0, 1, 2, 3]).unwrap();
    assert!(c.anchors.column(1).iter().all(|v| v.abs() <= 1e-10));
}

#[test]
fn anchors_file_passes_through() {
    let data = iris();
    let control = default_controls(&data, Some(6), 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("anchors.csv");
    write_anchors_csv(std::fs::File::create(&path).unwrap(), &control).unwrap();
    let back = load_anchors_csv(&path, 4).unwrap();
    assert_eq!(back, control);
    let config = ProjectionConfig {
        anchors: Some(back.clone()),
        ..ProjectionConfig::default()
    };
    let (_, proj) = project_at_scale(&data, &config).unwrap();
    for (c, &row) in back.indices.iter().enumerate() {
        assert_eq!(proj.coords.row(row), back.anchors.row(c));
    }
}

#[test]
fn lamp_recovers_a_rotation_in_the_plane() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let pts = random_points(&mut rng, 12, 2);
    let data = dataset(&pts, &[0; 12]);
    let (s, c) = 0.7f64.sin_cos();
    let rot = |p: &[f64]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
    let idx = vec![0, 3, 6, 9];
    let anchors: Vec<[f64; 2]> = idx.iter().map(|&i| rot(&pts[i])).collect();
    let control = ControlPointSet::new(idx, Matrix::from_rows(&anchors).unwrap(), 2).unwrap();
    let proj = lamp_project(&data, &control).unwrap();
    for (i, p) in pts.iter().enumerate() {
        let want = rot(p);
        assert!(
            close(proj.coords[(i, 0)], want[0], 1e-6) && close(proj.coords[(i, 1)], want[1], 1e-6)
        );
    }
}

#[test]
fn lamp_matches_grid_oracle_on_small_instance() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let pts = random_points(&mut rng, 5, 3);
    let anchors = [[0.0, 0.0], [2.0, 0.5], [-1.0, 1.5]];
    let data = dataset(&pts, &[0; 5]);
    let control =
        ControlPointSet::new(vec![0, 1, 2], Matrix::from_rows(&anchors).unwrap(), 3).unwrap();
    let proj = lamp_project(&data, &control).unwrap();
    for (i, p) in pts.iter().enumerate() {
        let want = lamp_grid_oracle(p, &pts[..3], &anchors);
        assert!(
            close(proj.coords[(i, 0)], want[0], 1e-3) && close(proj.coords[(i, 1)], want[1], 1e-3)
        );
    }
    assert_eq!(proj.coords.row(1), &anchors[1]);
}

#[test]
fn silhouette_on_random_two_class_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let pts = random_points(&mut rng, 10, 3);
    let labels = random_labels(&mut rng, 10, 2);
    let d = pairwise_distances(&Matrix::from_rows(&pts).unwrap());
    assert!(close(
        silhouette(&d, &labels).unwrap(),
        brute_silhouette(&pts, &labels),
        1e-12
    ));
}

#[test]
fn np_on_distorted_line() {
    // four evenly spaced points; the 2D layout pulls the interior towards the right end
    let high: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
    let low: Vec<Vec<f64>> = [0.0, 1.5, 2.0, 2.4].iter().map(|&x| vec![x, 0.0]).collect();
    // high k=1 (ties to the lower index): 0->1, 1->0, 2->1, 3->2
    // low  k=1:                           0->1, 1->2, 2->3, 3->2
    // both endpoints keep their neighbour, both interior points lose theirs
    let expected = 2.0 / 4.0;
    assert_eq!(brute_np(&high, &low, 1), expected);
    let dh = pairwise_distances(&Matrix::from_rows(&high).unwrap());
    let dl = pairwise_distances(&Matrix::from_rows(&low).unwrap());
    assert_eq!(neighborhood_preservation(&dh, &dl, 1).unwrap(), expected);

    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let h = random_points(&mut rng, 8, 4);
    let l = random_points(&mut rng, 8, 2);
    let dh = pairwise_distances(&Matrix::from_rows(&h).unwrap());
    let dl = pairwise_distances(&Matrix::from_rows(&l).unwrap());
    assert_eq!(
        neighborhood_preservation(&dh, &dl, 3).unwrap(),
        brute_np(&h, &l, 3)
    );
}

#[test]
fn silhouette_ratio_examples() {
    let d = pairwise_distances(&Matrix::from_rows(&[[0.0], [1.0], [10.0], [11.0]]).unwrap());
    assert_eq!(silhouette_ratio(&d, &d, &[0, 0, 1, 1]).unwrap(), 1.0);

    // within-class gap g, between-class gap 1: every term is 1 - g
    let pairs = |g: f64| {
        DistanceMatrix::from_raw(
            4,
            vec![
                0.0, g, 1.0, 1.0, g, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, g, 1.0, 1.0, g, 0.0,
            ],
        )
        .unwrap()
    };
    let (low, high) = (pairs(0.55), pairs(0.1));
    assert!(close(silhouette(&low, &[0, 0, 1, 1]).unwrap(), 0.45, 1e-15));
    assert!(close(silhouette(&high, &[0, 0, 1, 1]).unwrap(), 0.9, 1e-15));
    assert!(close(
        silhouette_ratio(&high, &low, &[0, 0, 1, 1]).unwrap(),
        0.5,
        1e-15
    ));

    let data = wine();
    let control = default_controls(&data, None, 4).unwrap();
    let proj = lamp_project(&data, &control).unwrap();
    let labels = lamp_quality::dataset::encode_labels(&data.labels);
    let high_pts: Vec<Vec<f64>> = data.features.rows_iter().map(<[f64]>::to_vec).collect();
    let low_pts: Vec<Vec<f64>> = proj.coords.rows_iter().map(<[f64]>::to_vec).collect();
    let want = brute_silhouette(&low_pts, &labels) / brute_silhouette(&high_pts, &labels);
    let got = silhouette_ratio(
        &pairwise_distances(&data.features),
        &pairwise_distances(&proj.coords),
        &labels,
    )
    .unwrap();
    assert!(close(got, want, 1e-12), "{got} vs {want}");
}

#[test]
fn combined_metric_examples() {
    let w = MetricWeights::PUBLISHED;
    let m = MetricVector {
        m1: 0.5,
        m2: 0.8,
        m3: 2.0,
        k_used: 7,
    };
    let want = 5.7097 * 0.5 + 3.77416 * 0.8 + -0.0106 * 2.0;
    assert!(close(want, 5.852978, 1e-12));
    assert!(close(combined_metric(&m, &w), want, 1e-12));
}

#[test]
fn identity_projection_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let pts = random_points(&mut rng, 20, 2);
    let labels = random_labels(&mut rng, 20, 3);
    let data = dataset(&pts, &labels);
    let w = MetricWeights::PUBLISHED;
    let (m, score) = score_coords(&data, &data.features, 5, &w).unwrap();
    assert_eq!((m.m2, m.m3), (1.0, 1.0));
    assert!(close(score, w.w1 * m.m1 + w.w2 + w.w3, 1e-12));

    let data = iris();
    let control = default_controls(&data, None, 1).unwrap();
    let proj = lamp_project(&data, &control).unwrap();
    let (m, score) = score_projection(&data, &proj, 7, &w).unwrap();
    assert!(score.is_finite() && m.m3.is_finite());
    assert!((-1.0..=1.0).contains(&m.m1) && (0.0..=1.0).contains(&m.m2));
    let (m, _) = score_projection(&data, &proj, data.len() - 1, &w).unwrap();
    assert_eq!(m.m2, 1.0);
}

fn sample(m: [f64; 3], grade: u8) -> GradedProjection {
    GradedProjection::new(
        MetricVector {
            m1: m[0],
            m2: m[1],
            m3: m[2],
            k_used: 7,
        },
        grade,
        "t",
    )
    .unwrap()
}

#[test]
fn normal_system_examples() {
    let basis = [
        sample([1.0, 0.0, 0.0], 1),
        sample([0.0, 1.0, 0.0], 2),
        sample([0.0, 0.0, 1.0], 3),
    ];
    let sys = build_normal_system(&basis).unwrap();
    assert_eq!(sys.a, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    assert_eq!(sys.b, [1.0, 2.0, 3.0]);

    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let (m, _) = planted_samples(&mut rng, 10, [0.0; 3]);
    let samples: Vec<GradedProjection> = m
        .iter()
        .enumerate()
        .map(|(i, r)| sample(*r, (i % 5 + 1) as u8))
        .collect();
    let once = build_normal_system(&samples).unwrap();
    let y: Vec<f64> = samples.iter().map(|s| s.grade as f64).collect();
    let (a, b) = triple_loop_normal(&m, &y);
    assert_eq!((once.a, once.b), (a, b));

    // eighths keep every partial sum exact, so doubling is exact too
    let dyadic: Vec<GradedProjection> = (0..10)
        .map(|i| {
            sample(
                [i as f64 / 8.0, (10 - i) as f64 / 8.0, (i % 3) as f64 / 4.0],
                (i % 5 + 1) as u8,
            )
        })
        .collect();
    let once = build_normal_system(&dyadic).unwrap();
    let doubled: Vec<GradedProjection> = dyadic.iter().chain(&dyadic).cloned().collect();
    let twice = build_normal_system(&doubled).unwrap();
    for i in 0..3 {
        assert_eq!(twice.b[i], 2.0 * once.b[i]);
        for j in 0..3 {
            assert_eq!(twice.a[i][j], 2.0 * once.a[i][j]);
        }
    }
}

#[test]
fn fit_reproduces_published_solution_from_gram_data() {
    // rows of M = L^T where A = L L^T, targets y = L^{-1} b
    let a = [
        [8.25391394, 5.41666345, 13.24087516],
        [5.41666345, 5.45949627, 14.00792903],
        [13.24087516, 14.00792903, 1095.0485935],
    ];
    let b = [67.4299, 51.3835, 116.8538];
    let chol = nalgebra::Matrix3::from_fn(|i, j| a[i][j])
        .cholesky()
        .unwrap();
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&nalgebra::Vector3::from(b))
        .unwrap();
    let rows: Vec<[f64; 3]> = (0..3).map(|r| [l[(0, r)], l[(1, r)], l[(2, r)]]).collect();
    let w = least_squares_weights(&rows, y.as_slice()).unwrap();
    assert!(
        close(w.w1, 5.7097, 1e-3) && close(w.w2, 3.7741, 1e-3) && close(w.w3, -0.0106, 1e-3),
        "{w:?}"
    );
}

#[test]
fn repeated_metric_vector_is_singular() {
    let samples = vec![sample([0.3, 0.6, 1.2], 3); 5];
    assert!(matches!(
        fit_weights(&samples),
        Err(Error::SingularSystem { .. })
    ));
}

#[test]
fn split_and_stats_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let (m, _) = planted_samples(&mut rng, 80, [0.0; 3]);
    let samples: Vec<GradedProjection> = m.iter().map(|r| sample(*r, 3)).collect();
    assert_eq!(
        split_train_test(&samples, 0.7, 4).unwrap(),
        split_train_test(&samples, 0.7, 4).unwrap()
    );

    let exact = [sample([1.0, 0.0, 0.0], 2), sample([0.0, 1.0, 0.0], 4)];
    let stats = evaluate(&exact, &MetricWeights::new(2.0, 4.0, 0.0)).unwrap();
    assert_eq!((stats.mae, stats.std), (0.0, 0.0));

    let s = error_stats(&[1.0, 3.0]);
    assert_eq!((s.mae, s.median), (2.0, 2.0));

    let errors: Vec<f64> = (0..20).map(|i| ((i * 7919) % 37) as f64 / 9.0).collect();
    let (mae, median, std) = brute_stats(&errors);
    let s = error_stats(&errors);
    assert!(close(s.mae, mae, 1e-12) && close(s.median, median, 1e-12) && close(s.std, std, 1e-12));
}

#[test]
fn single_scale_sweep_picks_it() {
    let data = iris();
    let control = default_controls(&data, None, 0).unwrap();
    let (t, _) = sweep_scales(
        &data,
        &[ScaleSpec::MinMax(0.3)],
        &control,
        7,
        &MetricWeights::PUBLISHED,
        0,
    )
    .unwrap();
    assert_eq!(t.best_index, 0);
}

#[test]
fn rendering_is_deterministic() {
    let data = iris();
    let control = default_controls(&data, None, 0).unwrap();
    let proj = lamp_project(&data, &control).unwrap();
    let spec = RenderSpec::default().with_annotation("iris");
    let a = render_scatter(&proj.coords, &data.labels, &spec).unwrap();
    let b = render_scatter(&proj.coords, &data.labels, &spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.matches("<circle").count(), 150);
}
