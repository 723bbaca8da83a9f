//! Command-line surface: `synth`, `encode`, `decode`, `eval`, `baseline-rw`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Errors go to stderr
//! prefixed with `usage error: ` or `data error: `.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::decoding::{decode_instances, DecodeReport};
use crate::encoding::{encode_targets, EncodedTargets};
use crate::error::Error;
use crate::io::{read_label_map, read_raster, write_pgm, write_raster, RasterValue};
use crate::metrics::{evaluate_with, AjiMode, MetricReport};
use crate::raster::{Connectivity, RasterShape};
use crate::rw::rw_instances;
use crate::synth::{generate_scene, SynthParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cvenc", version, about = "Center-vector encoding for nuclear instance segmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic ground-truth label map.
    Synth(SynthArgs),
    /// Turn a ground-truth label map into inside/center/vector targets.
    Encode(EncodeArgs),
    /// Decode predicted inside/center/vector rasters into instances.
    Decode(DecodeArgs),
    /// Score predicted label maps against ground truth.
    Eval(EvalArgs),
    /// Random walker instance differentiation seeded by center regions.
    BaselineRw(BaselineArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    height: usize,
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value_t = 30)]
    count: usize,
    #[arg(long, default_value_t = 5.0)]
    radius_min: f64,
    #[arg(long, default_value_t = 12.0)]
    radius_max: f64,
    #[arg(long, default_value_t = 0.6)]
    eccentricity_max: f64,
    /// Keep nuclei separated by at least one background pixel.
    #[arg(long)]
    no_touching: bool,
    #[arg(long, default_value_t = 0.1)]
    max_overlap: f64,
    /// Also export a 16-bit PGM for viewing.
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[arg(long)]
    gt: PathBuf,
    /// Receives inside.cvr, center.cvr, vectors.cvr and centroids.txt.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    erosion_radius: Option<u32>,
    #[arg(long)]
    center_distance_threshold: Option<f64>,
    #[arg(long)]
    connectivity: Option<Connectivity>,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long)]
    inside: PathBuf,
    #[arg(long)]
    center: PathBuf,
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Write the decode report here as well as to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    pgm: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    thresholds: DecodeFlags,
}

#[derive(Debug, Args)]
struct DecodeFlags {
    #[arg(long)]
    inside_threshold: Option<f64>,
    #[arg(long)]
    center_threshold: Option<f64>,
    #[arg(long)]
    min_instance_area: Option<usize>,
    #[arg(long)]
    decode_connectivity: Option<Connectivity>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Ground-truth label maps, paired in order with --pred.
    #[arg(long, required = true, num_args = 1..)]
    gt: Vec<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    pred: Vec<PathBuf>,
    #[arg(long, default_value = "literal", value_parser = ["literal", "used-flag"])]
    aji_mode: String,
    /// Machine-readable JSON report.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Evaluate images in parallel (output is identical).
    #[arg(long)]
    parallel: bool,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(long)]
    inside: PathBuf,
    #[arg(long)]
    center: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    pgm: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    thresholds: DecodeFlags,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    cg_tolerance: Option<f64>,
    #[arg(long)]
    cg_max_iters: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidParameter(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Runs the CLI with `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "usage error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a, stdout),
        Command::Encode(a) => cmd_encode(a, stdout),
        Command::Decode(a) => cmd_decode(a, stdout),
        Command::Eval(a) => cmd_eval(a, stdout),
        Command::BaselineRw(a) => cmd_baseline(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "usage error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Data(m)) => {
            let _ = writeln!(stderr, "data error: {m}");
            EXIT_DATA
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn load_config(args: &ConfigArgs) -> CliResult<RunConfig> {
    match &args.config {
        Some(p) => RunConfig::load(p).map_err(|e| match e {
            Error::Io(io) => io_err(p, io),
            other => CliError::Usage(format!("{}: {other}", p.display())),
        }),
        None => Ok(RunConfig::default()),
    }
}

fn apply_decode_flags(cfg: &mut RunConfig, f: &DecodeFlags) {
    if let Some(v) = f.inside_threshold {
        cfg.decode.inside_threshold = v;
    }
    if let Some(v) = f.center_threshold {
        cfg.decode.center_threshold = v;
    }
    if let Some(v) = f.min_instance_area {
        cfg.decode.min_instance_area = v;
    }
    if let Some(v) = f.decode_connectivity {
        cfg.decode.connectivity = v;
    }
}

fn read(path: &Path) -> CliResult<RasterValue> {
    read_raster(path).map_err(|e| io_err(path, e))
}

fn write(value: &RasterValue, path: &Path) -> CliResult<()> {
    write_raster(value, path).map_err(|e| io_err(path, e))
}

fn out(stdout: &mut dyn std::io::Write, text: &str) -> CliResult<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Data(format!("stdout: {e}")))
}

fn cmd_synth(a: SynthArgs, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let shape = RasterShape::new(a.height, a.width).map_err(|e| CliError::Usage(e.to_string()))?;
    let params = SynthParams {
        seed: a.seed,
        shape,
        nucleus_count: a.count,
        radius_range: (a.radius_min, a.radius_max),
        eccentricity_max: a.eccentricity_max,
        allow_touching: !a.no_touching,
        max_overlap_fraction: a.max_overlap,
    };
    let labels = generate_scene(&params)?;
    write(&RasterValue::Labels(labels.clone()), &a.out)?;
    if let Some(p) = &a.pgm {
        write_pgm(&labels, p).map_err(|e| io_err(p, e))?;
    }
    out(stdout, &format!("instances={}\nshape={}\n", labels.labels().len(), shape))
}

/// Centroid sidecar: `label cx cy` rows, then the labels without a center region.
pub fn centroid_sidecar(t: &EncodedTargets) -> String {
    let mut s = String::from("# label cx cy\n");
    for c in &t.centroids {
        let _ = writeln!(s, "{} {} {}", c.instance_label, c.cx, c.cy);
    }
    let empty: Vec<String> = t.empty_center_labels.iter().map(u32::to_string).collect();
    let _ = writeln!(s, "# empty_center {}", empty.join(" "));
    s
}

fn cmd_encode(a: EncodeArgs, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let mut cfg = load_config(&a.config)?;
    if let Some(v) = a.erosion_radius {
        cfg.encode.erosion_radius = v;
    }
    if let Some(v) = a.center_distance_threshold {
        cfg.encode.center_distance_threshold = v;
    }
    if let Some(v) = a.connectivity {
        cfg.encode.connectivity = v;
    }
    cfg.validate()?;
    let dir = a
        .out_dir
        .or(cfg.output_dir.clone())
        .ok_or_else(|| CliError::Usage("encode needs --out-dir (or output_dir in the config)".into()))?;
    let gt = read_label_map(&a.gt).map_err(|e| io_err(&a.gt, e))?;
    let t = encode_targets(&gt, &cfg.encode)?;
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    write(&RasterValue::Mask(t.inside.clone()), &dir.join("inside.cvr"))?;
    write(&RasterValue::Mask(t.center.clone()), &dir.join("center.cvr"))?;
    write(&RasterValue::Vector(t.vectors.clone()), &dir.join("vectors.cvr"))?;
    let sidecar = dir.join("centroids.txt");
    fs::write(&sidecar, centroid_sidecar(&t)).map_err(|e| io_err(&sidecar, e))?;
    let mut msg = format!("instances={}\nempty_center_regions={}\n", t.centroids.len(), t.empty_center_labels.len());
    if !t.empty_center_labels.is_empty() {
        let _ = writeln!(msg, "warning=empty center regions for labels {:?}", t.empty_center_labels);
    }
    out(stdout, &msg)
}

pub fn decode_report_text(instances: usize, r: &DecodeReport) -> String {
    format!(
        "instances={instances}\nsuppressed_components={}\nfallback_pixels={}\nholes_filled={}\n",
        r.suppressed_components, r.fallback_pixels, r.holes_filled
    )
}

fn cmd_decode(a: DecodeArgs, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let mut cfg = load_config(&a.config)?;
    apply_decode_flags(&mut cfg, &a.thresholds);
    cfg.validate()?;
    let inside = read(&a.inside)?.into_probability().map_err(|e| io_err(&a.inside, e))?;
    let center = read(&a.center)?.into_probability().map_err(|e| io_err(&a.center, e))?;
    let vectors = read(&a.vectors)?.into_vectors().map_err(|e| io_err(&a.vectors, e))?;
    let (labels, report) = decode_instances(&inside, &center, &vectors, &cfg.decode)?;
    write(&RasterValue::Labels(labels.clone()), &a.out)?;
    if let Some(p) = &a.pgm {
        write_pgm(&labels, p).map_err(|e| io_err(p, e))?;
    }
    let text = decode_report_text(labels.labels().len(), &report);
    if let Some(p) = &a.report {
        fs::write(p, &text).map_err(|e| io_err(p, e))?;
    }
    out(stdout, &text)
}

#[derive(Debug, Serialize)]
struct ImageEntry {
    name: String,
    aji: f64,
    iou: f64,
    dice: f64,
    unmatched_preds: usize,
}

#[derive(Debug, Serialize)]
struct EvalJson {
    aji_mode: AjiMode,
    images: Vec<ImageEntry>,
    aggregate: Aggregate,
}

#[derive(Debug, Serialize)]
struct Aggregate {
    images: usize,
    aji: f64,
    iou: f64,
    dice: f64,
}

fn cmd_eval(a: EvalArgs, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    if a.gt.len() != a.pred.len() {
        return Err(CliError::Usage(format!(
            "got {} --gt files but {} --pred files",
            a.gt.len(),
            a.pred.len()
        )));
    }
    let mode: AjiMode = a.aji_mode.parse()?;
    let pairs: Vec<(&PathBuf, &PathBuf)> = a.gt.iter().zip(&a.pred).collect();
    let eval_one = |(g, p): &(&PathBuf, &PathBuf)| -> CliResult<MetricReport> {
        let gt = read_label_map(g).map_err(|e| io_err(g, e))?;
        let pred = read_label_map(p).map_err(|e| io_err(p, e))?;
        evaluate_with(&gt, &pred, mode).map_err(|e| io_err(g, e))
    };
    let reports: Vec<CliResult<MetricReport>> = if a.parallel {
        pairs.par_iter().map(eval_one).collect()
    } else {
        pairs.iter().map(eval_one).collect()
    };
    let mut images = Vec::with_capacity(reports.len());
    for (r, (g, _)) in reports.into_iter().zip(&pairs) {
        let r = r?;
        images.push(ImageEntry {
            name: g.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            aji: r.aji,
            iou: r.iou,
            dice: r.dice,
            unmatched_preds: r.assignment.unmatched_preds.len(),
        });
    }
    let n = images.len() as f64;
    let aggregate = Aggregate {
        images: images.len(),
        aji: images.iter().map(|i| i.aji).sum::<f64>() / n,
        iou: images.iter().map(|i| i.iou).sum::<f64>() / n,
        dice: images.iter().map(|i| i.dice).sum::<f64>() / n,
    };
    let mut text = String::new();
    for i in &images {
        let _ = write!(
            text,
            "# image {}\naji={:.6}\niou={:.6}\ndice={:.6}\n",
            i.name, i.aji, i.iou, i.dice
        );
    }
    let _ = write!(
        text,
        "# aggregate\nimages={}\naji={:.6}\niou={:.6}\ndice={:.6}\n",
        aggregate.images, aggregate.aji, aggregate.iou, aggregate.dice
    );
    if let Some(p) = &a.json {
        let doc = EvalJson { aji_mode: mode, images, aggregate };
        let body = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Data(e.to_string()))?;
        fs::write(p, body + "\n").map_err(|e| io_err(p, e))?;
    }
    out(stdout, &text)
}

fn cmd_baseline(a: BaselineArgs, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let mut cfg = load_config(&a.config)?;
    apply_decode_flags(&mut cfg, &a.thresholds);
    if let Some(v) = a.beta {
        cfg.rw.beta = v;
    }
    if let Some(v) = a.cg_tolerance {
        cfg.rw.cg_tolerance = v;
    }
    if let Some(v) = a.cg_max_iters {
        cfg.rw.cg_max_iters = v;
    }
    cfg.validate()?;
    let inside = read(&a.inside)?.into_probability().map_err(|e| io_err(&a.inside, e))?;
    let center = read(&a.center)?.into_probability().map_err(|e| io_err(&a.center, e))?;
    let labels = rw_instances(&inside, &center, &cfg.decode, &cfg.rw)?;
    write(&RasterValue::Labels(labels.clone()), &a.out)?;
    if let Some(p) = &a.pgm {
        write_pgm(&labels, p).map_err(|e| io_err(p, e))?;
    }
    out(stdout, &format!("instances={}\n", labels.labels().len()))
}
