//! Render the same dataset at several scales, one SVG per scale, each
//! annotated with its quality scores.
//!
//! cargo run --example scale_gallery -- [out_dir]

use std::fs;
use std::path::PathBuf;

use lamp_quality::tuner::sweep_scales;
use lamp_quality::{
    default_controls, load_csv, render_scatter, LabelColumn, MetricWeights, RenderSpec, ScaleSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("lamp-gallery"));
    fs::create_dir_all(&out)?;
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/wine.csv");
    let data = load_csv(path, &LabelColumn::Name("class".into()))?;

    let scales = [0.01, 0.1, 0.2, 1.0, 10.0, 100.0].map(ScaleSpec::MinMax);
    let mut all = scales.to_vec();
    all.push(ScaleSpec::Raw);
    let control = default_controls(&data, None, 7)?;
    let (table, projections) =
        sweep_scales(&data, &all, &control, 7, &MetricWeights::PUBLISHED, 7)?;

    for (entry, proj) in table.entries.iter().zip(&projections) {
        let m = &entry.metrics;
        let caption = format!(
            "scale {}  m1 {:.3}  m2 {:.3}  m3 {:.3}  M {:.3}",
            entry.scale, m.m1, m.m2, m.m3, entry.score
        );
        let svg = render_scatter(
            &proj.coords,
            &data.labels,
            &RenderSpec::default().with_annotation(&caption),
        )?;
        let file = out.join(format!("wine_{}.svg", entry.scale));
        fs::write(&file, svg)?;
        println!("{caption}  -> {}", file.display());
    }
    Ok(())
}
