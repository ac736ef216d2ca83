//! Project a labelled CSV to 2D at a chosen min-max scale and write the
//! layout as CSV and SVG.
//!
//! cargo run --example project -- [data.csv] [scale] [out_dir]

use std::fs;
use std::path::PathBuf;

use lamp_quality::lamp::write_projection_csv;
use lamp_quality::{
    load_csv, project_at_scale, render_scatter, score_projection, LabelColumn, MetricWeights,
    ProjectionConfig, RenderSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let data_path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/iris.csv"));
    let scale = args.next().unwrap_or_else(|| "1".into()).parse()?;
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("lamp-project"));
    fs::create_dir_all(&out)?;

    let raw = load_csv(&data_path, &LabelColumn::Name("class".into()))?;
    let config = ProjectionConfig {
        scale,
        seed: 42,
        ..ProjectionConfig::default()
    };
    let (scaled, proj) = project_at_scale(&raw, &config)?;
    println!(
        "{}: {} rows x {} features, {} control points, scale {}",
        raw.name,
        raw.len(),
        raw.dim(),
        proj.control.len(),
        proj.scale_used
    );

    let (m, score) = score_projection(&scaled, &proj, 7, &MetricWeights::PUBLISHED)?;
    println!(
        "m1 = {:.4}  m2 = {:.4}  m3 = {:.4}  score = {:.4}",
        m.m1, m.m2, m.m3, score
    );

    write_projection_csv(
        fs::File::create(out.join("projection.csv"))?,
        &proj,
        &raw.labels,
    )?;
    let spec = RenderSpec::default().with_annotation(format!(
        "{} at scale {}  score {:.3}",
        raw.name, scale, score
    ));
    fs::write(
        out.join("projection.svg"),
        render_scatter(&proj.coords, &raw.labels, &spec)?,
    )?;
    println!("wrote {}", out.display());
    Ok(())
}
