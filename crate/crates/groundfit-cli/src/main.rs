//! Command-line front end: simulate labeled clouds, run ground detection,
//! score predictions, and benchmark the methods.
//!
//! Exit codes: 0 success (including the single-plane fallback, which is
//! surfaced as a warning), 1 unrecoverable algorithmic failure, 2 input or
//! usage errors.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use groundfit::config::{DetectorConfig, Method};
use groundfit::eval::{self, BenchReport, SegmentationMetrics};
use groundfit::partition::{DetectError, Outcome};
use groundfit::ransac::RansacError;
use groundfit::scan::{self, LabeledCloud};
use groundfit::simulate::{self, LidarConfig, Scene};
use groundfit::tangent::estimate_tangents;
use groundfit::{io as gio};

#[derive(Parser)]
#[command(name = "groundfit", version, about = "Ground-surface detection for sparse spinning lidars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Raycast a scene into a labeled cloud CSV.
    Simulate(SimulateArgs),
    /// Detect ground in a cloud CSV and write a labeling plus sidecar.
    Detect(DetectArgs),
    /// Score a predicted labeling against a labeled truth cloud.
    Evaluate(EvaluateArgs),
    /// Time detection methods on a cloud.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Canonical scene name (see `--scene help` for the list).
    #[arg(long, conflicts_with = "scene_file")]
    scene: Option<String>,
    /// Scene description file (TOML) instead of a canonical scene.
    #[arg(long)]
    scene_file: Option<PathBuf>,
    /// Raycast noise seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output cloud CSV path.
    #[arg(long, short = 'o')]
    out: PathBuf,
    /// Range noise σ in meters (0 disables).
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Sensor height above the scene origin, meters.
    #[arg(long)]
    sensor_height: Option<f64>,
    /// Azimuth resolution, degrees per step.
    #[arg(long)]
    azimuth_res_deg: Option<f64>,
    /// Maximum return range, meters.
    #[arg(long)]
    max_range: Option<f64>,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat key=value config file (CLI flags take precedence).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inlier distance threshold ε, meters.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Tangent-perpendicularity threshold δ, degrees.
    #[arg(long)]
    delta_deg: Option<f64>,
    /// Number of RANSAC hypotheses M.
    #[arg(long)]
    hypotheses: Option<usize>,
    /// Bins per side B of the partition grid.
    #[arg(long)]
    grid_size: Option<usize>,
    /// Minimum inliers per partition quadrant T.
    #[arg(long)]
    min_quadrant_inliers: Option<u32>,
    /// Crop radius, meters.
    #[arg(long)]
    crop_radius: Option<f64>,
    /// Downsampling cell, meters.
    #[arg(long)]
    downsample: Option<f64>,
    /// Seed for hypothesis sampling.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    /// defaults < config file < explicit flags.
    fn resolve(&self) -> Result<DetectorConfig, CliError> {
        let mut config = DetectorConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path).map_err(|e| CliError::Input(e.to_string()))?;
        }
        if let Some(v) = self.epsilon {
            config.epsilon = v;
        }
        if let Some(v) = self.delta_deg {
            config.delta_deg = v;
        }
        if let Some(v) = self.hypotheses {
            config.hypotheses = v;
        }
        if let Some(v) = self.grid_size {
            config.grid_size = v;
        }
        if let Some(v) = self.min_quadrant_inliers {
            config.min_quadrant_inliers = v;
        }
        if let Some(v) = self.crop_radius {
            config.crop_radius = v;
        }
        if let Some(v) = self.downsample {
            config.downsample = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Input cloud CSV.
    input: PathBuf,
    /// Detection method.
    #[arg(long, default_value = "proposed")]
    method: Method,
    /// Output labeling CSV; the sidecar goes to `<out>.meta`.
    #[arg(long, short = 'o')]
    out: PathBuf,
    /// Write a point_id,tx,ty,tz tangent dump to this path.
    #[arg(long)]
    dump_tangents: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Predicted labeling CSV (point_id,ground).
    pred: PathBuf,
    /// Truth cloud CSV with label column.
    truth: PathBuf,
    /// Also append the metrics as a CSV row to this path.
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Input cloud CSV.
    input: PathBuf,
    /// Comma-separated methods to time.
    #[arg(long, default_value = "proposed,vanilla,lpr", value_delimiter = ',')]
    methods: Vec<Method>,
    /// Detection runs per method.
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Also write the report rows as CSV to this path.
    #[arg(long)]
    csv_out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

enum CliError {
    /// Bad input data, paths, or usage: exit 2.
    Input(String),
    /// Detection could not produce an answer: exit 1.
    Algorithm(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Algorithm(msg) => f.write_str(msg),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Algorithm(_) => 1,
        }
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::Sampling(RansacError::NotEnoughPoints(_))
            | DetectError::Sampling(RansacError::Degenerate { .. }) => {
                CliError::Algorithm(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn resolve_scene(args: &SimulateArgs) -> Result<Scene, CliError> {
    if let Some(path) = &args.scene_file {
        return Scene::load(path).map_err(|e| CliError::Input(e.to_string()));
    }
    let scenes = simulate::canonical_scenes();
    let name = args.scene.as_deref().ok_or_else(|| {
        CliError::Input("either --scene or --scene-file is required".to_string())
    })?;
    scenes.get(name).cloned().ok_or_else(|| {
        let names: Vec<&str> = scenes.keys().copied().collect();
        CliError::Input(format!(
            "unknown scene {name:?}; available scenes: {}",
            names.join(", ")
        ))
    })
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let scene = resolve_scene(&args)?;
    let mut lidar = LidarConfig::default();
    if let Some(v) = args.noise_sigma {
        lidar.noise_sigma = v;
    }
    if let Some(v) = args.sensor_height {
        lidar.sensor_height = v;
    }
    if let Some(v) = args.azimuth_res_deg {
        lidar.azimuth_resolution_deg = v;
    }
    if let Some(v) = args.max_range {
        lidar.max_range = v;
    }
    lidar.validate().map_err(|e| CliError::Input(e.to_string()))?;

    let cloud = simulate::raycast(&scene, &lidar, args.seed);
    let mut w = BufWriter::new(File::create(&args.out)?);
    scan::write_cloud(&mut w, &cloud.points, cloud.labels.as_deref())?;
    w.flush()?;
    eprintln!("wrote {} points to {}", cloud.points.len(), args.out.display());
    Ok(())
}

fn load_cloud(path: &Path, config: &DetectorConfig) -> Result<LabeledCloud, CliError> {
    scan::load_cloud(path, config.scan_rows, config.scan_cols)
        .map_err(|e| CliError::Input(e.to_string()))
}

fn cmd_detect(args: DetectArgs) -> Result<(), CliError> {
    let config = args.config.resolve()?;
    let cloud = load_cloud(&args.input, &config)?;

    println!("effective-config:");
    println!("method={}", args.method);
    println!("{}", config.echo());

    let labeling = eval::run_method(args.method, &cloud.points, &config)?;
    if let Outcome::SinglePlane { fallback: true, .. } = labeling.outcome {
        eprintln!("warning: no feasible cross partition; fell back to the best single plane");
    }

    gio::write_labeling_file(&args.out, &labeling)?;
    let meta_path = sidecar_path(&args.out);
    gio::write_sidecar_file(&meta_path, args.method, &config, &labeling)?;
    println!(
        "labeled {} of {} points as ground",
        labeling.ground_count(),
        cloud.points.len()
    );

    if let Some(path) = &args.dump_tangents {
        let scan = scan::organize(&cloud.points, config.scan_rows, config.scan_cols);
        let tangents = estimate_tangents(&scan, &cloud.points, &config.tangent_params());
        let mut w = BufWriter::new(File::create(path)?);
        gio::write_tangents(&mut w, &tangents)?;
        w.flush()?;
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_owned();
    os.push(".meta");
    PathBuf::from(os)
}

fn format_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.6}"),
        None => "undefined".to_string(),
    }
}

fn print_metrics(m: &SegmentationMetrics) {
    println!("tp={}", m.true_positives);
    println!("fp={}", m.false_positives);
    println!("fn={}", m.false_negatives);
    println!("tn={}", m.true_negatives);
    println!("precision={}", format_opt(m.precision()));
    println!("recall={}", format_opt(m.recall()));
    println!("f1={}", format_opt(m.f1()));
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let config = DetectorConfig::default();
    let truth = load_cloud(&args.truth, &config)?;
    if truth.labels.is_none() {
        return Err(CliError::Input(format!(
            "truth cloud {} has no label column",
            args.truth.display()
        )));
    }
    let rows = gio::read_labeling(&args.pred).map_err(|e| CliError::Input(e.to_string()))?;

    // The prediction must cover exactly the truth's point ids.
    let n = truth.points.len();
    let mut predicted = vec![None::<bool>; n];
    for (id, flag) in &rows {
        let slot = predicted
            .get_mut(*id as usize)
            .ok_or_else(|| CliError::Input(format!("prediction id {id} not present in truth")))?;
        if slot.replace(*flag).is_some() {
            return Err(CliError::Input(format!("duplicate prediction for id {id}")));
        }
    }
    if predicted.iter().any(Option::is_none) {
        return Err(CliError::Input(
            "prediction does not cover every truth point id".to_string(),
        ));
    }
    let flags: Vec<bool> = predicted.into_iter().map(Option::unwrap).collect();

    let metrics = eval::score_flags(&flags, n, truth.labels.as_ref().unwrap())
        .map_err(|e| CliError::Input(e.to_string()))?;
    print_metrics(&metrics);

    if let Some(path) = &args.csv_out {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "tp,fp,fn,tn,precision,recall,f1")?;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            metrics.true_positives,
            metrics.false_positives,
            metrics.false_negatives,
            metrics.true_negatives,
            format_opt(metrics.precision()),
            format_opt(metrics.recall()),
            format_opt(metrics.f1()),
        )?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.runs == 0 {
        return Err(CliError::Input("--runs must be at least 1".to_string()));
    }
    if args.methods.is_empty() {
        return Err(CliError::Input("--methods must name at least one method".to_string()));
    }
    let config = args.config.resolve()?;
    let cloud = load_cloud(&args.input, &config)?;

    let mut reports: Vec<BenchReport> = Vec::new();
    for &method in &args.methods {
        let report = eval::bench(method, &cloud.points, args.runs, &config)?;
        reports.push(report);
    }

    println!("{:<10} {:>10} {:>10} {:>8} {:>6}", "method", "mean_ms", "p95_ms", "points", "runs");
    for r in &reports {
        println!(
            "{:<10} {:>10.2} {:>10.2} {:>8} {:>6}",
            r.method.name(),
            r.mean_ms,
            r.p95_ms,
            r.points,
            r.runs
        );
    }
    println!("config-hash={}", config.content_hash());

    if let Some(path) = &args.csv_out {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "method,mean_ms,p95_ms,points,runs,config_hash")?;
        for r in &reports {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.method.name(),
                r.mean_ms,
                r.p95_ms,
                r.points,
                r.runs,
                r.config_hash
            )?;
        }
        w.flush()?;
    }
    Ok(())
}
