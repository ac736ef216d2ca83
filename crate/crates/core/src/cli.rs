//! The `lampq` command line. Exit status 0 on success, 1 for bad input,
//! 2 for numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dataset::{load_csv, minmax_scale, LabelColumn, LabeledDataset, ScaleSpec};
use crate::error::{Error, Result};
use crate::lamp::{
    load_anchors_csv, load_projection_csv, project_at_scale, write_projection_csv, ProjectionConfig,
};
use crate::linalg::Matrix;
use crate::metrics::{
    score_coords, score_projection, MetricReportRow, MetricVector, MetricWeights, DEFAULT_K,
};
use crate::render::{render_scatter, RenderSpec};
use crate::trainer::{
    evaluate, fit_weights, load_graded_csv, split_train_test, split_train_test_by_dataset,
    write_histogram_csv, write_stats_csv,
};
use crate::tuner::{coarse_to_fine, sweep_with_projections, ReportEntry, SweepConfig, SweepReport};

#[derive(Debug, Parser)]
#[command(
    name = "lampq",
    version,
    about = "LAMP projections, quality metrics and scale tuning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Project a dataset to 2D; writes projection.csv and projection.svg.
    Project(ProjectArgs),
    /// Score a projection against its dataset; writes one metric report row.
    Evaluate(EvaluateArgs),
    /// Fit metric weights to graded projections.
    Train(TrainArgs),
    /// Sweep the min-max scale and pick the best by the learned metric.
    Tune(TuneArgs),
    /// Render a projection CSV as SVG.
    Render(RenderArgs),
    /// Summarize metric report rows per dataset.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Dataset CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Label column, by name or 0-based index.
    #[arg(long, default_value = "class")]
    label: String,
}

impl DataArgs {
    fn load(&self) -> Result<LabeledDataset> {
        let label: LabelColumn = self.label.parse().expect("infallible");
        load_csv(&self.data, &label)
    }
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Neighbourhood size for neighborhood preservation.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// JSON file with w1, w2, w3; defaults to the published weights.
    #[arg(long)]
    weights: Option<PathBuf>,
}

impl MetricArgs {
    fn weights(&self) -> Result<MetricWeights> {
        match &self.weights {
            Some(p) => MetricWeights::from_json(&read_text(p)?),
            None => Ok(MetricWeights::PUBLISHED),
        }
    }
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    metric: MetricArgs,
    /// `raw` or a positive upper bound for per-feature min-max scaling.
    #[arg(long, default_value = "raw")]
    scale: String,
    /// Number of control points (default ceil(sqrt(n))).
    #[arg(long)]
    controls: Option<usize>,
    /// Anchors override CSV (`index,x,y`).
    #[arg(long)]
    anchors: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    metric: MetricArgs,
    /// Projection CSV (`row,x,y,label`).
    #[arg(long)]
    projection: PathBuf,
    /// Scale the projection was made at; the dataset is rescaled to match.
    #[arg(long, default_value = "raw")]
    scale: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Graded samples CSV (`m1,m2,m3,grade,dataset,scale,seed`).
    #[arg(long)]
    grades: PathBuf,
    /// Fraction of samples used for training.
    #[arg(long, default_value_t = 0.7)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Split each dataset separately at the same ratio.
    #[arg(long)]
    stratify: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    metric: MetricArgs,
    #[arg(long = "min", default_value_t = 0.1)]
    min: f64,
    #[arg(long = "max", default_value_t = 1.0)]
    max: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of control points (default ceil(sqrt(n))).
    #[arg(long)]
    controls: Option<usize>,
    /// Also score the unscaled data.
    #[arg(long)]
    include_raw: bool,
    /// Ignore --min/--max and run a decade sweep followed by a uniform refinement.
    #[arg(long)]
    coarse_fine: bool,
    /// Write one SVG per scale.
    #[arg(long)]
    svg: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Projection CSV (`row,x,y,label`).
    #[arg(long)]
    projection: PathBuf,
    /// Caption drawn above the plot.
    #[arg(long)]
    annotation: Option<String>,
    #[arg(long, default_value_t = 480)]
    width: u32,
    #[arg(long, default_value_t = 480)]
    height: u32,
    /// Output SVG file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Metric report CSV files.
    #[arg(long = "input", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Output CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Project(a) => cmd_project(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Train(a) => cmd_train(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Render(a) => cmd_render(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn annotation(scale: ScaleSpec, m: &MetricVector, score: f64) -> String {
    format!(
        "scale={scale} m1={:.4} m2={:.4} m3={:.4} M={:.4}",
        m.m1, m.m2, m.m3, score
    )
}

fn metric_row_csv(rows: &[MetricReportRow]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in rows {
        wtr.serialize(r)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::io("<report>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn cmd_project(a: ProjectArgs) -> Result<()> {
    let raw = a.data.load()?;
    let scale: ScaleSpec = a.scale.parse()?;
    let anchors = a
        .anchors
        .as_ref()
        .map(|p| load_anchors_csv(p, raw.dim()))
        .transpose()?;
    let config = ProjectionConfig {
        scale,
        controls: a.controls,
        seed: a.seed,
        anchors,
    };
    let (scaled, proj) = project_at_scale(&raw, &config)?;
    let (m, score) = score_projection(&scaled, &proj, a.metric.k, &a.metric.weights()?)?;

    ensure_dir(&a.out)?;
    let mut csv_bytes = Vec::new();
    write_projection_csv(&mut csv_bytes, &proj, &raw.labels)?;
    write_file(&a.out.join("projection.csv"), csv_bytes)?;
    let spec = RenderSpec::default().with_annotation(annotation(scale, &m, score));
    write_file(
        &a.out.join("projection.svg"),
        render_scatter(&proj.coords, &raw.labels, &spec)?,
    )?;
    print!(
        "{}",
        metric_row_csv(&[MetricReportRow::new(
            &raw.name,
            &scale.to_string(),
            a.seed,
            &m,
            score
        )])?
    );
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let raw = a.data.load()?;
    let scale: ScaleSpec = a.scale.parse()?;
    let scaled = minmax_scale(&raw, scale);
    let points = load_projection_csv(&a.projection)?;
    if points.len() != raw.len() || points.iter().enumerate().any(|(i, p)| p.row != i) {
        return Err(Error::ShapeMismatch(format!(
            "projection rows do not cover the {} dataset rows",
            raw.len()
        )));
    }
    let coords = Matrix::from_rows(&points.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>())?;
    let (m, score) = score_coords(&scaled, &coords, a.metric.k, &a.metric.weights()?)?;
    let text = metric_row_csv(&[MetricReportRow::new(
        &raw.name,
        &scale.to_string(),
        a.seed,
        &m,
        score,
    )])?;
    match &a.out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SplitCount<'a> {
    dataset: &'a str,
    train: usize,
    test: usize,
    total: usize,
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let samples = load_graded_csv(&a.grades)?;
    let split = if a.stratify {
        split_train_test_by_dataset(&samples, a.ratio, a.seed)?
    } else {
        split_train_test(&samples, a.ratio, a.seed)?
    };
    let weights = fit_weights(&split.train)?;
    let train_stats = evaluate(&split.train, &weights)?;
    let test_stats = evaluate(&split.test, &weights)?;
    let rows = [("train", &train_stats), ("test", &test_stats)];

    ensure_dir(&a.out)?;
    write_file(&a.out.join("weights.json"), weights.to_json() + "\n")?;
    let mut buf = Vec::new();
    write_stats_csv(&mut buf, &rows)?;
    write_file(&a.out.join("stats.csv"), &buf)?;
    print!("{}", String::from_utf8_lossy(&buf));
    let mut buf = Vec::new();
    write_histogram_csv(&mut buf, &rows)?;
    write_file(&a.out.join("histogram.csv"), buf)?;

    let counts = split.counts_by_dataset();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for (name, tr, te) in &counts {
        wtr.serialize(SplitCount {
            dataset: name,
            train: *tr,
            test: *te,
            total: tr + te,
        })?;
    }
    wtr.serialize(SplitCount {
        dataset: "Total",
        train: split.train.len(),
        test: split.test.len(),
        total: samples.len(),
    })?;
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::io("<split>", e.into_error()))?;
    write_file(&a.out.join("split_counts.csv"), bytes)?;
    Ok(())
}

/// Informational comparison of a coarse-to-fine run against the empirically
/// good range `[0.1, 1]`.
#[derive(Serialize)]
struct CoarseFineReport<'a> {
    dataset: &'a str,
    seed: u64,
    k: usize,
    weights: MetricWeights,
    coarse: Vec<ReportEntry>,
    refined_interval: (f64, f64),
    fine: Vec<ReportEntry>,
    best_scale: ScaleSpec,
    best_score: f64,
    best_in_expected_range: bool,
}

fn write_svgs(
    dir: &Path,
    data: &LabeledDataset,
    table: &crate::tuner::SweepTable,
    projs: &[crate::lamp::Projection2D],
) -> Result<()> {
    for (e, p) in table.entries.iter().zip(projs) {
        let spec = RenderSpec::default().with_annotation(annotation(e.scale, &e.metrics, e.score));
        let svg = render_scatter(&p.coords, &data.labels, &spec)?;
        write_file(&dir.join(format!("scale_{}.svg", e.scale)), svg)?;
    }
    Ok(())
}

fn cmd_tune(a: TuneArgs) -> Result<()> {
    let data = a.data.load()?;
    let weights = a.metric.weights()?;
    ensure_dir(&a.out)?;
    if a.coarse_fine {
        let res = coarse_to_fine(&data, a.metric.k, &weights, a.seed, a.controls, a.steps)?;
        let best = res.best_scale.value().unwrap_or(f64::NAN);
        let report = CoarseFineReport {
            dataset: &data.name,
            seed: a.seed,
            k: a.metric.k,
            weights,
            coarse: res.coarse.entries.iter().map(ReportEntry::from).collect(),
            refined_interval: res.refined,
            fine: res.fine.entries.iter().map(ReportEntry::from).collect(),
            best_scale: res.best_scale,
            best_score: res.best_score,
            best_in_expected_range: (0.1..=1.0).contains(&best),
        };
        let json = serde_json::to_string_pretty(&report)?;
        write_file(&a.out.join("coarse_fine.json"), json + "\n")?;
        println!(
            "{}: best scale {} (score {:.4}), within [0.1, 1]: {}",
            data.name, res.best_scale, res.best_score, report.best_in_expected_range
        );
        return Ok(());
    }
    let config = SweepConfig {
        a: a.min,
        b: a.max,
        steps: a.steps,
        k: a.metric.k,
        weights,
        seed: a.seed,
        include_raw: a.include_raw,
        controls: a.controls,
    };
    let (table, projs) = sweep_with_projections(&data, &config)?;
    let report = SweepReport::new(&data.name, &config, &table);
    write_file(&a.out.join("sweep.json"), report.to_json() + "\n")?;
    if a.svg {
        write_svgs(&a.out, &data, &table, &projs)?;
    }
    println!(
        "{}: best scale {} (score {:.4})",
        data.name, report.best_scale, report.best_score
    );
    Ok(())
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let points = load_projection_csv(&a.projection)?;
    let coords = Matrix::from_rows(&points.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>())?;
    let labels: Vec<String> = points.into_iter().map(|p| p.label).collect();
    let spec = RenderSpec {
        width: a.width,
        height: a.height,
        annotation: a.annotation,
        ..RenderSpec::default()
    };
    write_file(&a.out, render_scatter(&coords, &labels, &spec)?)
}

#[derive(Debug, Serialize, PartialEq)]
struct SummaryRow {
    dataset: String,
    runs: usize,
    mean_m1: f64,
    mean_m2: f64,
    mean_m3: f64,
    mean_score: f64,
    best_scale: String,
    best_score: f64,
}

fn summarize(rows: &[MetricReportRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<&str, Vec<&MetricReportRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(&r.dataset).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(name, g)| {
            let n = g.len() as f64;
            let mean = |f: fn(&MetricReportRow) -> f64| g.iter().map(|r| f(r)).sum::<f64>() / n;
            let best = g
                .iter()
                .fold(g[0], |b, r| if r.score > b.score { r } else { b });
            SummaryRow {
                dataset: name.to_string(),
                runs: g.len(),
                mean_m1: mean(|r| r.m1),
                mean_m2: mean(|r| r.m2),
                mean_m3: mean(|r| r.m3),
                mean_score: mean(|r| r.score),
                best_scale: best.scale.clone(),
                best_score: best.score,
            }
        })
        .collect()
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let mut rows = Vec::new();
    for p in &a.inputs {
        let file = fs::File::open(p).map_err(|e| Error::io(p, e))?;
        let mut rdr = csv::Reader::from_reader(file);
        for r in rdr.deserialize() {
            rows.push(r?);
        }
    }
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for s in summarize(&rows) {
        wtr.serialize(s)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::io("<report>", e.into_error()))?;
    match &a.out {
        Some(p) => write_file(p, bytes),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}
