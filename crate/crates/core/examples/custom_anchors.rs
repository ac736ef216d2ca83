//! Place control points by hand: pin one representative per class at a
//! chosen spot and let LAMP arrange everything else around them.

use lamp_quality::lamp::lamp_mappings;
use lamp_quality::lamp::PointMapping;
use lamp_quality::{
    lamp_project, load_csv, minmax_scale, ControlPointSet, LabelColumn, Matrix, ScaleSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/iris.csv");
    let data = minmax_scale(
        &load_csv(path, &LabelColumn::Name("class".into()))?,
        ScaleSpec::MinMax(1.0),
    );

    // first, middle and last row of each 50-row class block, laid out on a triangle
    let indices = vec![0, 25, 49, 50, 75, 99, 100, 125, 149];
    let corners = [[0.0, 1.0], [-0.9, -0.5], [0.9, -0.5]];
    let anchors: Vec<[f64; 2]> = indices
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let c = corners[i / 3];
            let jitter = 0.05 * (i % 3) as f64;
            [c[0] + jitter, c[1] - jitter]
        })
        .collect();
    let control = ControlPointSet::new(indices, Matrix::from_rows(&anchors)?, data.dim())?;

    let proj = lamp_project(&data, &control)?;
    let worst = lamp_mappings(&data, &control)?
        .iter()
        .filter_map(|m| match m {
            PointMapping::Affine(lm) => Some(lm.orthogonality_error()),
            PointMapping::Anchor(_) => None,
        })
        .fold(0.0, f64::max);
    println!("max |M^T M - I| over local maps: {worst:.2e}");

    for class in data.class_names() {
        let rows: Vec<usize> = (0..data.len())
            .filter(|&i| data.labels[i] == class)
            .collect();
        let n = rows.len() as f64;
        let cx = rows.iter().map(|&i| proj.coords[(i, 0)]).sum::<f64>() / n;
        let cy = rows.iter().map(|&i| proj.coords[(i, 1)]).sum::<f64>() / n;
        println!("{class:<12} centre ({cx:+.3}, {cy:+.3})");
    }
    Ok(())
}
