//! Find the min-max scale that the learned metric likes best: a uniform
//! sweep over [0.1, 1] first, then decades followed by a refinement.
//!
//! cargo run --release --example tune_scale -- [data.csv]

use std::path::PathBuf;

use lamp_quality::{
    best_scale, coarse_to_fine, load_csv, sweep, LabelColumn, MetricWeights, SweepConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/wine.csv"));
    let data = load_csv(&path, &LabelColumn::Name("class".into()))?;

    let mut config = SweepConfig::new(0.1, 1.0, 10);
    config.seed = 7;
    config.include_raw = true;
    let table = sweep(&data, &config)?;
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>8}",
        "scale", "m1", "m2", "m3", "score"
    );
    for (i, e) in table.entries.iter().enumerate() {
        let mark = if i == table.best_index { " <" } else { "" };
        let m = &e.metrics;
        println!(
            "{:>6} {:>8.4} {:>8.4} {:>8.4} {:>8.4}{mark}",
            e.scale.to_string(),
            m.m1,
            m.m2,
            m.m3,
            e.score
        );
    }
    println!("best on the grid: {}", best_scale(&table));

    let cf = coarse_to_fine(&data, 7, &MetricWeights::PUBLISHED, 7, None, 10)?;
    let decades: Vec<String> = cf
        .coarse
        .entries
        .iter()
        .map(|e| format!("{}:{:.3}", e.scale, e.score))
        .collect();
    println!("decades {}", decades.join("  "));
    println!(
        "refined [{}, {}] -> best scale {} (score {:.4})",
        cf.refined.0, cf.refined.1, cf.best_scale, cf.best_score
    );
    Ok(())
}
