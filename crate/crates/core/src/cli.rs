//! Command-line front end. Every subcommand is a thin wrapper over library
//! calls; results are written atomically next to a JSON sidecar echoing the
//! arguments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::anomaly::{abnormal_frames, abnormal_regions, frame_scores, write_scores_csv};
use crate::error::{Error, Result};
use crate::io::{read_frame_labels, read_scored_csv, read_vol1, write_atomic, write_pgm_frames, write_roc_csv, write_vol1, Dtype};
use crate::metrics::{auc, best_f_measure, eer_from_curve, roc, FMeasureMode, ScoredSamples};
use crate::pipeline::{prepare_channels, video_saliency, ColorMode, PipelineConfig, Video};
use crate::qft::{run_qft_comparison, ComparisonConfig};
use crate::saliency::{SmoothSpec, WindowSpec};
use crate::stsp::{detect_points, extract_all, write_descriptors_csv, write_points_csv, DescriptorScale, NmsConfig, Threshold};
use crate::synth::{generate_trial, run_benchmark, write_benchmark_csv, BenchmarkPlan, GroundTruthMask, MotionKind, TrialConfig};

#[derive(Debug, Parser)]
#[command(name = "stsal", version, about = "Phase-spectrum spatiotemporal saliency")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Saliency map of a video (VOL1 file or PGM/PPM frame directory).
    Saliency(SaliencyArgs),
    /// Synthetic motion trials: one trial's video and mask, or a benchmark CSV.
    Synth(SynthArgs),
    /// Per-frame abnormality scores and abnormal-region mask.
    Anomaly(AnomalyArgs),
    /// Spatiotemporal interest points and their descriptors.
    Stip(StipArgs),
    /// Quaternion FFT saliency versus summed per-channel saliency.
    QftCompare(QftArgs),
    /// AUC, EER and best F-measure from scores and labels.
    Eval(EvalArgs),
}

/// Preprocessing and saliency options shared by video subcommands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct PipelineArgs {
    /// Temporal window length in frames; full-span saliency when omitted.
    #[arg(long)]
    pub window_length: Option<usize>,
    /// Window hop in frames; defaults to the window length.
    #[arg(long)]
    pub window_hop: Option<usize>,
    #[arg(long, default_value_t = 3.0)]
    pub sigma_spatial: f64,
    #[arg(long, default_value_t = 1.5)]
    pub sigma_temporal: f64,
    /// Spatial box-average factor applied before anything else.
    #[arg(long, default_value_t = 1)]
    pub downsample: usize,
    #[arg(long, value_enum, default_value_t = ColorMode::Gray)]
    pub color: ColorMode,
}

impl PipelineArgs {
    pub fn config(&self) -> Result<PipelineConfig> {
        let window = match (self.window_length, self.window_hop) {
            (Some(length), hop) => Some(WindowSpec { length, hop: hop.unwrap_or(length) }),
            (None, Some(_)) => return Err(Error::invalid("--window-hop needs --window-length")),
            (None, None) => None,
        };
        Ok(PipelineConfig {
            downsample: self.downsample,
            color: self.color,
            window,
            smooth: SmoothSpec::new(self.sigma_spatial, self.sigma_temporal)?,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SaliencyArgs {
    /// VOL1 file (1 gray or 3 RGB channels) or directory of PGM/PPM frames.
    #[arg(long)]
    pub input: PathBuf,
    /// Output VOL1 file; metadata goes to `<output>.json`.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Also export min-max normalized PGM frames to this directory.
    #[arg(long)]
    pub pgm_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Dtype::F64)]
    pub dtype: Dtype,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Motion kind for a single trial.
    #[arg(long)]
    pub kind: Option<MotionKind>,
    /// Distractor parameter: rate in Hz, heading in rad, or speed in px/frame.
    #[arg(long)]
    pub distractor: Option<f64>,
    /// Target parameter; equal to the distractor (a blind trial) when omitted.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for `video.vol1`, `mask.vol1` and `synth.json`.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Number of frames per trial.
    #[arg(long, default_value_t = 400)]
    pub frames: usize,
    /// Run a benchmark grid and write `kind,distractor,target,seed,auc` here.
    #[arg(long)]
    pub benchmark: Option<PathBuf>,
    /// Benchmark kinds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "flicker,direction,velocity")]
    pub kinds: Vec<MotionKind>,
    /// Benchmark `distractor:target` pairs, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Vec<String>,
    /// Number of benchmark seeds, starting at `--seed`.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 3.0)]
    pub sigma_spatial: f64,
    #[arg(long, default_value_t = 1.5)]
    pub sigma_temporal: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnomalyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for `scores.csv`, `regions.vol1` and the optional outputs.
    #[arg(long)]
    pub output_dir: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Voxels above this multiple of the mean saliency are abnormal.
    #[arg(long, default_value_t = 4.0)]
    pub region_multiplier: f64,
    /// Also write `flags.csv` marking frames scoring above this value.
    #[arg(long)]
    pub frame_threshold: Option<f64>,
    /// `frame,label` CSV; adds `roc.csv` and prints AUC and EER.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorSource {
    /// Gradients of the (preprocessed) video.
    Video,
    /// Gradients of the saliency map.
    Saliency,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StipArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for `points.csv`, `descriptors.csv` and `stip.json`.
    #[arg(long)]
    pub output_dir: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value_t = DescriptorSource::Video)]
    pub source: DescriptorSource,
    /// Keep maxima above this multiple of the mean saliency.
    #[arg(long, conflicts_with = "threshold_absolute")]
    pub threshold_multiple: Option<f64>,
    /// Keep maxima above this saliency value.
    #[arg(long)]
    pub threshold_absolute: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub radius_x: usize,
    #[arg(long, default_value_t = 5)]
    pub radius_y: usize,
    #[arg(long, default_value_t = 3)]
    pub radius_t: usize,
    /// Descriptor boxes as `SPATIALxTEMPORAL`, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "18x10,25x14,36x20")]
    pub scales: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QftArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 8)]
    pub min_size: usize,
    #[arg(long, default_value_t = 128)]
    pub max_size: usize,
    /// Smoothing sigma in pixels for the smoothed comparison.
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-trial CSV; the summary goes to stdout and `<output>.json`.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// `score,label` CSV.
    #[arg(long, conflicts_with_all = ["saliency", "mask"])]
    pub scores: Option<PathBuf>,
    /// Saliency VOL1, scored voxelwise against `--mask`.
    #[arg(long, requires = "mask")]
    pub saliency: Option<PathBuf>,
    /// Binary VOL1 mask (nonzero = positive).
    #[arg(long, requires = "saliency")]
    pub mask: Option<PathBuf>,
    /// Write the ROC curve as `threshold,tpr,fpr`.
    #[arg(long)]
    pub roc_output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FMeasureMode::Standard)]
    pub f_mode: FMeasureMode,
}

/// Parses arguments, runs, and maps errors to exit codes: 2 for validation
/// failures, 1 for I/O failures.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Saliency(a) => cmd_saliency(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Anomaly(a) => cmd_anomaly(a),
        Command::Stip(a) => cmd_stip(a),
        Command::QftCompare(a) => cmd_qft(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_metadata<A: Serialize>(path: &Path, command: &str, args: &A, results: serde_json::Value) -> Result<()> {
    let meta = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "args": args,
        "results": results,
    });
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::invalid(e.to_string()))?;
    write_atomic(path, |w| writeln!(w, "{text}").map_err(|e| Error::io(path, e)))
}

fn write_csv_file<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    write_atomic(path, |w| fill(w))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_saliency(a: &SaliencyArgs) -> Result<()> {
    let cfg = a.pipeline.config()?;
    let video = Video::load(&a.input)?;
    let z = video_saliency(&video, &cfg)?;
    write_vol1(&a.output, std::slice::from_ref(z.as_volume()), a.dtype)?;
    let mut results = serde_json::json!({ "dims": z.dims(), "mean": z.mean() });
    if let Some(dir) = &a.pgm_dir {
        let norm = write_pgm_frames(dir, z.as_volume())?;
        results["pgm_min"] = norm.min.into();
        results["pgm_max"] = norm.max.into();
    }
    write_metadata(&sidecar(&a.output), "saliency", a, results)
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::invalid(format!("pair {s:?} must look like DISTRACTOR:TARGET"));
    let (d, t) = s.split_once(':').ok_or_else(bad)?;
    Ok((d.trim().parse().map_err(|_| bad())?, t.trim().parse().map_err(|_| bad())?))
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let smooth = SmoothSpec::new(a.sigma_spatial, a.sigma_temporal)?;
    if let Some(csv_path) = &a.benchmark {
        if a.pairs.is_empty() {
            return Err(Error::invalid("--benchmark needs at least one --pairs entry"));
        }
        let params = a.pairs.iter().map(|p| parse_pair(p)).collect::<Result<Vec<_>>>()?;
        let seeds = (a.seed..a.seed.saturating_add(a.seeds)).collect();
        let mut plan = BenchmarkPlan::new(a.kinds.clone(), params, seeds);
        plan.smooth = smooth;
        plan.base.frames = a.frames;
        for &kind in &plan.kinds {
            for &pair in &plan.params {
                plan.trial(kind, pair, a.seed).validate()?;
            }
        }
        let rows = run_benchmark(&plan)?;
        write_csv_file(csv_path, |w| write_benchmark_csv(&rows, w))?;
        return write_metadata(&sidecar(csv_path), "synth", a, serde_json::json!({ "rows": rows.len() }));
    }

    let (kind, distractor) = match (a.kind, a.distractor) {
        (Some(k), Some(d)) => (k, d),
        _ => return Err(Error::invalid("a single trial needs --kind and --distractor (or use --benchmark)")),
    };
    let dir = a
        .output_dir
        .as_ref()
        .ok_or_else(|| Error::invalid("a single trial needs --output-dir"))?;
    let cfg = TrialConfig {
        frames: a.frames,
        ..TrialConfig::new(kind, distractor, a.target.unwrap_or(distractor), a.seed)
    };
    let trial = generate_trial(&cfg)?;
    ensure_dir(dir)?;
    write_vol1(&dir.join("video.vol1"), std::slice::from_ref(&trial.video), Dtype::F32)?;
    write_vol1(&dir.join("mask.vol1"), &[trial.mask.to_volume()], Dtype::F32)?;
    let results = serde_json::json!({ "config": cfg, "target_index": trial.layout.target });
    write_metadata(&dir.join("synth.json"), "synth", a, results)
}

fn cmd_anomaly(a: &AnomalyArgs) -> Result<()> {
    let cfg = a.pipeline.config()?;
    if !(a.region_multiplier > 0.0 && a.region_multiplier.is_finite()) {
        return Err(Error::invalid("--region-multiplier must be > 0"));
    }
    let video = Video::load(&a.input)?;
    let labels = match &a.labels {
        Some(p) => {
            let f = fs::File::open(p).map_err(|e| Error::io(p, e))?;
            Some(read_frame_labels(f, video.dims().frames)?)
        }
        None => None,
    };
    let z = video_saliency(&video, &cfg)?;
    let scores = frame_scores(&z);
    let regions = abnormal_regions(&z, a.region_multiplier)?;
    let flags = a.frame_threshold.map(|th| abnormal_frames(&scores, th)).transpose()?;

    ensure_dir(&a.output_dir)?;
    write_csv_file(&a.output_dir.join("scores.csv"), |w| write_scores_csv(&scores, w))?;
    write_vol1(&a.output_dir.join("regions.vol1"), &[regions.to_volume()], Dtype::F32)?;
    let mut results = serde_json::json!({ "frames": scores.len(), "abnormal_voxels": regions.count() });
    if let Some(flags) = flags {
        write_csv_file(&a.output_dir.join("flags.csv"), |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["frame", "abnormal"])?;
            for (t, f) in flags.iter().enumerate() {
                c.write_record([t.to_string(), u8::from(*f).to_string()])?;
            }
            c.flush().map_err(|e| Error::io("flags.csv", e))
        })?;
        results["abnormal_frames"] = flags.iter().filter(|&&f| f).count().into();
    }
    if let Some(labels) = labels {
        let samples = ScoredSamples::new(scores.scores().to_vec(), labels)?;
        let curve = roc(&samples)?;
        write_csv_file(&a.output_dir.join("roc.csv"), |w| write_roc_csv(&curve, w))?;
        let (area, rate) = (auc(&curve), eer_from_curve(&curve));
        println!("auc={area} eer={rate}");
        results["auc"] = area.into();
        results["eer"] = rate.into();
    }
    write_metadata(&a.output_dir.join("anomaly.json"), "anomaly", a, results)
}

fn parse_scale(s: &str) -> Result<DescriptorScale> {
    let bad = || Error::invalid(format!("scale {s:?} must look like SPATIALxTEMPORAL, e.g. 18x10"));
    let (sp, t) = s.split_once('x').ok_or_else(bad)?;
    Ok(DescriptorScale::new(sp.trim().parse().map_err(|_| bad())?, t.trim().parse().map_err(|_| bad())?))
}

fn cmd_stip(a: &StipArgs) -> Result<()> {
    let cfg = a.pipeline.config()?;
    let scales = a.scales.iter().map(|s| parse_scale(s)).collect::<Result<Vec<_>>>()?;
    let threshold = match a.threshold_absolute {
        Some(v) => Threshold::Absolute(v),
        None => Threshold::MeanMultiple(a.threshold_multiple.unwrap_or(2.0)),
    };
    let nms = NmsConfig { threshold, radius: (a.radius_x, a.radius_y, a.radius_t) };
    nms.validate()?;

    let video = Video::load(&a.input)?;
    let z = video_saliency(&video, &cfg)?;
    let points = detect_points(&z, &nms)?;
    let descriptors = match a.source {
        DescriptorSource::Saliency => extract_all(z.as_volume(), &points, &scales),
        DescriptorSource::Video => {
            let channels = prepare_channels(&video, cfg.downsample, cfg.color)?;
            extract_all(&channels[0], &points, &scales)
        }
    };

    ensure_dir(&a.output_dir)?;
    write_csv_file(&a.output_dir.join("points.csv"), |w| write_points_csv(&points, w))?;
    write_csv_file(&a.output_dir.join("descriptors.csv"), |w| write_descriptors_csv(&descriptors, w))?;
    let results = serde_json::json!({
        "points": points.len(),
        "descriptors": descriptors.len(),
        "rho": nms.rho(&z),
    });
    write_metadata(&a.output_dir.join("stip.json"), "stip", a, results)
}

fn cmd_qft(a: &QftArgs) -> Result<()> {
    let cfg = ComparisonConfig {
        trials: a.trials,
        min_size: a.min_size,
        max_size: a.max_size,
        sigma: a.sigma,
        seed: a.seed,
    };
    let report = run_qft_comparison(&cfg)?;
    write_csv_file(&a.output, |w| report.write_csv(w))?;
    println!("{}", report.summary_line());
    let results = serde_json::json!({
        "trials": report.trials.len(),
        "skipped": report.skipped(),
        "mean_corr_raw": report.mean_raw(),
        "mean_corr_smoothed": report.mean_smoothed(),
    });
    write_metadata(&sidecar(&a.output), "qft-compare", a, results)
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let samples = match (&a.scores, &a.saliency, &a.mask) {
        (Some(p), None, None) => {
            let f = fs::File::open(p).map_err(|e| Error::io(p, e))?;
            read_scored_csv(f)?
        }
        (None, Some(s), Some(m)) => {
            let z = single_channel(s)?;
            let mask = GroundTruthMask::from_volume(&single_channel(m)?);
            z.dims().ensure_same(mask.dims())?;
            ScoredSamples::new(z.into_data(), mask.bits().to_vec())?
        }
        _ => return Err(Error::invalid("give either --scores, or --saliency with --mask")),
    };
    let curve = roc(&samples)?;
    let (threshold, f) = best_f_measure(&samples, a.f_mode)?;
    if let Some(p) = &a.roc_output {
        write_csv_file(p, |w| write_roc_csv(&curve, w))?;
    }
    println!(
        "auc={} eer={} best_f={} f_threshold={}",
        auc(&curve),
        eer_from_curve(&curve),
        f,
        threshold
    );
    Ok(())
}

fn single_channel(path: &Path) -> Result<crate::volume::Volume> {
    let mut channels = read_vol1(path)?;
    if channels.len() != 1 {
        return Err(Error::invalid(format!("{} must hold one channel, found {}", path.display(), channels.len())));
    }
    Ok(channels.pop().unwrap())
}
