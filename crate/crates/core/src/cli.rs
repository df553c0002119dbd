//! The `symmpix` command line. Each subcommand renders every output in
//! memory first and then commits all files together.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use crate::axis::{axis_from_cluster, axis_from_pairs, f_score, match_axes, AxisRecord, SymmetryAxis};
use crate::clustering::{cluster_pairs, PairCluster};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::image::{load_image, RasterImage};
use crate::io::{
    encode_labels, mask_to_png, read_json, read_labels, read_mask, rgb_to_png, to_json, write_all_atomic,
    ClusterRecord, PairRecord,
};
use crate::metrics::{achievable_segmentation_accuracy, boundary_recall, under_segmentation_error};
use crate::overlay::{draw_axes, pairs_overlay, superpixel_overlay};
use crate::pairs::{detect_pairs, detection_probability, PairDetection};
use crate::segment::{error_rate, symmetric_segment, BinaryMask};
use crate::symmslic::run_symmslic;
use crate::synth::{generate, SynthParams};

#[derive(Debug, Parser)]
#[command(name = "symmpix", version, about = "Mirror symmetry aware superpixels, axes and masks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect mirror-symmetric pixel pairs.
    Pairs(PairsArgs),
    /// Symmetry-preserving superpixels.
    Superpixels(SuperpixelsArgs),
    /// Symmetry axes from an image or a clusters file.
    Axes(AxesArgs),
    /// Symmetric object mask.
    Segment(SegmentArgs),
    /// Score labels, masks or axes against ground truth.
    Eval(EvalArgs),
    /// Render a synthetic mirror-symmetric image with its ground truth.
    Synth(SynthArgs),
}

/// Pipeline settings. Precedence: defaults, then `--config`, then flags.
#[derive(Debug, Clone, Default, Args)]
pub struct Tuning {
    /// key = value file of settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Target superpixel count.
    #[arg(short = 'k', long = "k")]
    pub k: Option<usize>,
    /// Colour weight, within [1, 40].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Maximum clustering iterations.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Curve length in pixels.
    #[arg(long = "p")]
    pub p: Option<usize>,
    /// Gradient filter threshold.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Partner samples per edge pixel.
    #[arg(long = "samples")]
    pub h: Option<usize>,
    #[arg(long)]
    pub score_threshold: Option<f64>,
    /// Pair graph agreement threshold.
    #[arg(long)]
    pub tau: Option<f64>,
}

impl Tuning {
    pub fn resolve(&self) -> Result<Config> {
        let mut c = match &self.config {
            Some(path) => Config::from_file(path)?,
            None => Config::default(),
        };
        let s = &mut c.symmslic;
        if let Some(v) = self.k {
            s.k = v;
        }
        if let Some(v) = self.lambda {
            s.lambda = v;
        }
        if let Some(v) = self.iters {
            s.max_iters = v;
        }
        if let Some(v) = self.p {
            s.pairs.p = v;
        }
        if let Some(v) = self.epsilon {
            s.pairs.epsilon = v;
        }
        if let Some(v) = self.h {
            s.pairs.h = v;
        }
        if let Some(v) = self.score_threshold {
            s.pairs.score_threshold = v;
        }
        if let Some(v) = self.tau {
            s.clusters.tau = v;
        }
        if let Some(seed) = self.seed {
            c.set_seed(seed);
        }
        c.apply("")?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    pub image: PathBuf,
    #[arg(short, long, default_value = "pairs.json")]
    pub out: PathBuf,
    /// Also cluster the pairs by axis and write the clusters here.
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    /// Edge map as a 1-bit PNG.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: Tuning,
}

#[derive(Debug, Args)]
pub struct SuperpixelsArgs {
    pub image: PathBuf,
    /// `.csv` writes CSV, anything else a 16-bit PNG.
    #[arg(long, default_value = "labels.png")]
    pub labels: PathBuf,
    #[arg(long, default_value = "pairing.json")]
    pub pairing: PathBuf,
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: Tuning,
}

#[derive(Debug, Args)]
pub struct AxesArgs {
    /// An image, or a clusters JSON file written by `pairs --clusters`.
    pub input: PathBuf,
    #[arg(short, long, default_value = "axes.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    /// Background for the overlay when the input is a clusters file.
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: Tuning,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    pub image: PathBuf,
    #[arg(short, long, default_value = "mask.png")]
    pub out: PathBuf,
    /// Keep only the largest 4-connected component.
    #[arg(long)]
    pub largest_component: bool,
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: Tuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Use,
    Br,
    Asa,
    ErrorRate,
    Fscore,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Labels (use, br, asa), a mask (error-rate) or axes JSON (fscore).
    pub input: PathBuf,
    /// Ground truth of the same kind; for fscore also a synth truth file.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// Boundary recall tolerance in pixels.
    #[arg(short = 'r')]
    pub r: Option<usize>,
    #[arg(long)]
    pub angle_tol: Option<f64>,
    #[arg(long)]
    pub dist_tol: Option<f64>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Header and one row of CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    /// Axis direction in degrees from the x axis.
    #[arg(long, default_value_t = 90.0)]
    pub angle: f64,
    /// Point on the axis; the image centre by default.
    #[arg(long, num_args = 2, value_names = ["X", "Y"])]
    pub axis_point: Option<Vec<f64>>,
    #[arg(long, default_value_t = 3)]
    pub blobs: usize,
    /// Gaussian noise sigma in grey levels.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Sampled mirror correspondences stored in the truth file.
    #[arg(long, default_value_t = 200)]
    pub correspondences: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Ground truth written by `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub width: usize,
    pub height: usize,
    pub axis: AxisRecord,
    pub correspondences: Vec<[[u32; 2]; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub metric: Metric,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<crate::axis::MatchCounts>,
}

impl MetricReport {
    pub fn csv(&self) -> String {
        let name = serde_json::to_value(self.metric)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        format!("metric,value\n{name},{}\n", self.value)
    }
}

type Files = Vec<(PathBuf, Vec<u8>)>;

fn load(path: &Path) -> Result<RasterImage> {
    if !path.exists() {
        return Err(Error::io(path, std::io::ErrorKind::NotFound.into()));
    }
    load_image(path)
}

fn edge_mask(det: &PairDetection) -> Result<BinaryMask> {
    BinaryMask::new(det.edges.width(), det.edges.height(), det.edges.mask().to_vec())
}

fn cluster(det: &PairDetection, c: &Config) -> Vec<PairCluster> {
    cluster_pairs(&det.pairs, &det.curves, &c.symmslic.clusters)
}

pub fn cmd_pairs(args: &PairsArgs) -> Result<Files> {
    let c = args.tuning.resolve()?;
    let img = load(&args.image)?;
    let det = detect_pairs(&img, &c.symmslic.pairs)?;
    info!(
        "{} edge pixels, {} pairs; detection probability {:.4}",
        det.edges.pixels().len(),
        det.pairs.len(),
        detection_probability(det.edges.pixels().len().max(2), c.symmslic.pairs.h, c.u)
    );
    let records: Vec<PairRecord> = det.pairs.iter().map(PairRecord::from).collect();
    let mut files = vec![(args.out.clone(), to_json(&records)?)];
    if let Some(path) = &args.clusters {
        let clusters: Vec<ClusterRecord> = cluster(&det, &c).iter().map(ClusterRecord::from).collect();
        files.push((path.clone(), to_json(&clusters)?));
    }
    if let Some(path) = &args.overlay {
        files.push((path.clone(), rgb_to_png(&pairs_overlay(&img, &det.pairs))?));
    }
    if let Some(path) = &args.edges {
        files.push((path.clone(), mask_to_png(&edge_mask(&det)?)?));
    }
    Ok(files)
}

pub fn cmd_superpixels(args: &SuperpixelsArgs) -> Result<Files> {
    let c = args.tuning.resolve()?;
    let img = load(&args.image)?;
    let out = run_symmslic(&img, &c.symmslic)?;
    let sp = &out.superpixels;
    let mut files = vec![
        (args.labels.clone(), encode_labels(&args.labels, &sp.labels)?),
        (args.pairing.clone(), to_json(&sp.pairing.pairs)?),
    ];
    if let Some(path) = &args.overlay {
        files.push((path.clone(), rgb_to_png(&superpixel_overlay(&img, &sp.labels, &sp.pairing))?));
    }
    Ok(files)
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn cmd_axes(args: &AxesArgs) -> Result<Files> {
    let c = args.tuning.resolve()?;
    let (axes, background) = if is_json(&args.input) {
        let clusters: Vec<ClusterRecord> = read_json(&args.input)?;
        let axes = clusters
            .iter()
            .map(|cl| axis_from_pairs(&cl.pairs.iter().map(PairRecord::endpoints).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        let bg = args.image.as_deref().map(load).transpose()?;
        (axes, bg)
    } else {
        let img = load(&args.input)?;
        let det = detect_pairs(&img, &c.symmslic.pairs)?;
        let axes = cluster(&det, &c).iter().map(axis_from_cluster).collect::<Result<Vec<_>>>()?;
        (axes, Some(img))
    };
    let records: Vec<AxisRecord> = axes.iter().map(AxisRecord::from).collect();
    let mut files = vec![(args.out.clone(), to_json(&records)?)];
    if let Some(path) = &args.overlay {
        let bg = background.ok_or_else(|| {
            Error::InvalidParameter("--overlay with a clusters file needs --image".into())
        })?;
        let mut rgb = bg.to_rgb8();
        draw_axes(&mut rgb, &axes);
        files.push((path.clone(), rgb_to_png(&rgb)?));
    }
    Ok(files)
}

pub fn cmd_segment(args: &SegmentArgs) -> Result<Files> {
    let c = args.tuning.resolve()?;
    let img = load(&args.image)?;
    let out = run_symmslic(&img, &c.symmslic)?;
    let sp = &out.superpixels;
    let mut mask = symmetric_segment(&sp.labels, &sp.pairing);
    if args.largest_component || c.largest_component {
        mask = mask.largest_component();
    }
    let mut files = vec![(args.out.clone(), mask_to_png(&mask)?)];
    if let Some(path) = &args.overlay {
        files.push((path.clone(), rgb_to_png(&superpixel_overlay(&img, &sp.labels, &sp.pairing))?));
    }
    Ok(files)
}

fn read_truth_axes(path: &Path) -> Result<Vec<SymmetryAxis>> {
    let value: serde_json::Value = read_json(path)?;
    let records: Vec<AxisRecord> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value::<TruthRecord>(value)?.axis]
    };
    Ok(records.iter().map(SymmetryAxis::from).collect())
}

pub fn evaluate(args: &EvalArgs) -> Result<MetricReport> {
    let mut c = match &args.config {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    if let Some(r) = args.r {
        c.boundary_radius = r;
    }
    if let Some(v) = args.angle_tol {
        c.angle_tol = v;
    }
    if let Some(v) = args.dist_tol {
        c.dist_tol = v;
    }
    let mut counts = None;
    let value = match args.metric {
        Metric::Use | Metric::Br | Metric::Asa => {
            let labels = read_labels(&args.input)?;
            let gt = read_labels(&args.gt)?;
            match args.metric {
                Metric::Use => under_segmentation_error(&labels, &gt)?,
                Metric::Br => boundary_recall(&labels, &gt, c.boundary_radius)?,
                _ => achievable_segmentation_accuracy(&labels, &gt)?,
            }
        }
        Metric::ErrorRate => error_rate(&read_mask(&args.input)?, &read_mask(&args.gt)?)?,
        Metric::Fscore => {
            let detected: Vec<AxisRecord> = read_json(&args.input)?;
            let detected: Vec<SymmetryAxis> = detected.iter().map(SymmetryAxis::from).collect();
            let m = match_axes(&detected, &read_truth_axes(&args.gt)?, c.angle_tol, c.dist_tol);
            counts = Some(m);
            f_score(m.tp, m.fp, m.fn_)?
        }
    };
    Ok(MetricReport {
        metric: args.metric,
        value,
        counts,
    })
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(Files, MetricReport)> {
    let report = evaluate(args)?;
    let mut files = Vec::new();
    if let Some(path) = &args.out {
        files.push((path.clone(), to_json(&report)?));
    }
    if let Some(path) = &args.csv {
        files.push((path.clone(), report.csv().into_bytes()));
    }
    Ok((files, report))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<Files> {
    let mut params = SynthParams::centered(args.width, args.height, args.seed);
    let point = match args.axis_point.as_deref() {
        Some([x, y]) => Vec2::new(*x, *y),
        _ => params.axis.point,
    };
    params.axis = SymmetryAxis::from_angle(point, args.angle, 0);
    params.n_blobs = args.blobs;
    params.noise_sigma = args.noise;
    let synth = generate(&params)?;
    let truth = &synth.truth;
    let record = TruthRecord {
        width: args.width,
        height: args.height,
        axis: AxisRecord::from(&truth.axis),
        correspondences: truth
            .sample_correspondences(args.correspondences)
            .into_iter()
            .map(|(a, b)| [[a.x, a.y], [b.x, b.y]])
            .collect(),
    };
    let dir = &args.out_dir;
    Ok(vec![
        (dir.join("image.png"), rgb_to_png(&synth.image.to_rgb8())?),
        (dir.join("mask.png"), mask_to_png(&truth.mask)?),
        (dir.join("segments.png"), encode_labels("segments.png", &truth.segments)?),
        (dir.join("truth.json"), to_json(&record)?),
    ])
}

/// Caps the global thread pool from `SYMMPIX_THREADS` (0 or unset = auto).
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SYMMPIX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("SYMMPIX_THREADS must be a count, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    let files = match &cli.command {
        Command::Pairs(a) => cmd_pairs(a)?,
        Command::Superpixels(a) => cmd_superpixels(a)?,
        Command::Axes(a) => cmd_axes(a)?,
        Command::Segment(a) => cmd_segment(a)?,
        Command::Eval(a) => {
            let (files, report) = cmd_eval(a)?;
            print!("{}", report.csv());
            files
        }
        Command::Synth(a) => {
            if !a.out_dir.is_dir() {
                std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
            }
            cmd_synth(a)?
        }
    };
    write_all_atomic(&files)?;
    for (path, _) in &files {
        info!("wrote {}", path.display());
    }
    Ok(())
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("symmpix: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "k = 300\nlambda = 5\n").unwrap();
        let t = Tuning {
            config: Some(path),
            lambda: Some(20.0),
            seed: Some(9),
            ..Tuning::default()
        };
        let c = t.resolve().unwrap();
        assert_eq!(c.symmslic.k, 300);
        assert_eq!(c.symmslic.lambda, 20.0);
        assert_eq!(c.symmslic.pairs.seed, 9);
    }

    #[test]
    fn invalid_flag_value_rejected() {
        let t = Tuning {
            lambda: Some(0.5),
            ..Tuning::default()
        };
        assert!(t.resolve().is_err());
    }

    #[test]
    fn metric_csv_row() {
        let r = MetricReport {
            metric: Metric::ErrorRate,
            value: 0.25,
            counts: None,
        };
        assert_eq!(r.csv(), "metric,value\nerror-rate,0.25\n");
    }
}
