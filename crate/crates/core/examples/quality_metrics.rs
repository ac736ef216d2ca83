//! Compare the quality of three layouts of the same data: a LAMP projection,
//! a PCA projection, and a random scatter.

use lamp_quality::metrics::{score_coords, MetricVector};
use lamp_quality::{
    default_controls, lamp_project, load_csv, minmax_scale, pca_top2, LabelColumn, Matrix,
    MetricWeights, ScaleSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn show(name: &str, m: &MetricVector, score: f64) {
    println!(
        "{name:<8} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
        m.m1, m.m2, m.m3, score
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/wine.csv");
    let data = minmax_scale(
        &load_csv(path, &LabelColumn::Name("class".into()))?,
        ScaleSpec::MinMax(1.0),
    );
    let w = MetricWeights::PUBLISHED;
    let k = 7;

    println!(
        "{:<8} {:>8} {:>8} {:>8} {:>8}",
        "layout", "m1", "m2", "m3", "score"
    );

    let control = default_controls(&data, None, 0)?;
    let lamp = lamp_project(&data, &control)?;
    let (m, s) = score_coords(&data, &lamp.coords, k, &w)?;
    show("lamp", &m, s);

    let pca = pca_top2(&data.features)?;
    let (m, s) = score_coords(&data, &pca, k, &w)?;
    show("pca", &m, s);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise: Vec<[f64; 2]> = (0..data.len()).map(|_| [rng.gen(), rng.gen()]).collect();
    let (m, s) = score_coords(&data, &Matrix::from_rows(&noise)?, k, &w)?;
    show("random", &m, s);
    Ok(())
}
