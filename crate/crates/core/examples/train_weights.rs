//! Learn metric weights from graded projections.
//!
//! Real grades come from people looking at scatter plots. Here a noisy
//! stand-in judge grades projections of three datasets made at many scales
//! and seeds, then the weights are fitted on a per-dataset 75/25 split.
//!
//! cargo run --release --example train_weights -- [out_dir]

use std::fs;
use std::path::PathBuf;

use lamp_quality::trainer::{split_train_test_by_dataset, write_graded_csv, HISTOGRAM_BIN_WIDTH};
use lamp_quality::{
    evaluate, fit_weights, load_csv, project_at_scale, score_projection, GradedProjection,
    LabelColumn, MetricWeights, ProjectionConfig, ScaleSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Prefers well separated classes and kept neighbourhoods, with some noise.
fn judge(m1: f64, m2: f64, rng: &mut ChaCha8Rng) -> u8 {
    let g = 1.0 + 2.5 * (m1 + 1.0) / 2.0 + 3.0 * m2 + rng.gen_range(-0.6..0.6);
    g.round().clamp(1.0, 5.0) as u8
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("lamp-train"));
    fs::create_dir_all(&out)?;
    let data_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let mut samples = Vec::new();
    for (file, count) in [
        ("iris.csv", 28),
        ("wine.csv", 28),
        ("vehicle_synthetic.csv", 24),
    ] {
        let raw = load_csv(data_dir.join(file), &LabelColumn::Name("class".into()))?;
        for i in 0..count {
            let scale = match i % 4 {
                0 => ScaleSpec::Raw,
                _ => ScaleSpec::MinMax(10f64.powf(rng.gen_range(-2.0..2.0))),
            };
            let config = ProjectionConfig {
                scale,
                seed: i as u64,
                ..ProjectionConfig::default()
            };
            let (scaled, proj) = project_at_scale(&raw, &config)?;
            let (m, _) = score_projection(&scaled, &proj, 7, &MetricWeights::PUBLISHED)?;
            let mut g = GradedProjection::new(m, judge(m.m1, m.m2, &mut rng), raw.name.clone())?;
            g.scale = scale.to_string();
            g.seed = i as u64;
            samples.push(g);
        }
    }
    let grades_path = out.join("grades.csv");
    write_graded_csv(fs::File::create(&grades_path)?, &samples)?;

    let split = split_train_test_by_dataset(&samples, 0.75, 1)?;
    println!(
        "{:<18} {:>5} {:>5} {:>5}",
        "dataset", "train", "test", "total"
    );
    for (name, tr, te) in split.counts_by_dataset() {
        println!("{name:<18} {tr:>5} {te:>5} {:>5}", tr + te);
    }
    println!(
        "{:<18} {:>5} {:>5} {:>5}",
        "total",
        split.train.len(),
        split.test.len(),
        samples.len()
    );

    let w = fit_weights(&split.train)?;
    println!(
        "\nweights: w1 = {:.4}, w2 = {:.4}, w3 = {:.4}",
        w.w1, w.w2, w.w3
    );
    for (name, part) in [("train", &split.train), ("test", &split.test)] {
        let s = evaluate(part, &w)?;
        println!(
            "{name:<5} mae {:.4}  median {:.4}  std {:.4}",
            s.mae, s.median, s.std
        );
        let bars: Vec<String> = s
            .histogram
            .iter()
            .enumerate()
            .take_while(|(b, _)| (*b as f64) * HISTOGRAM_BIN_WIDTH < s.max + HISTOGRAM_BIN_WIDTH)
            .map(|(b, c)| format!("{:.2}:{c}", b as f64 * HISTOGRAM_BIN_WIDTH))
            .collect();
        println!("      |error| histogram {}", bars.join(" "));
    }
    println!(
        "\ngrades written to {} (try `lampq train --grades` on it)",
        grades_path.display()
    );
    Ok(())
}
