//! Command-line front end: `embed`, `extract`, `metrics` and `bench`.
//!
//! Exit codes are stable: 0 success, 2 invalid arguments (including
//! mismatched dimensions), 3 payload over capacity, 4 I/O or malformed
//! input, 5 key/image mismatch or checksum failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::audio::{parse_wav, write_wav, AudioError, AudioPayload};
use crate::image::{load_image, save_image, ImageError, RasterImage};
use crate::metrics::{MetricsError, QualityReport};
use crate::optimizer::{OptimizationResult, OptimizerError, OptimizerParams};
use crate::stego::{
    read_key, run_embedding, run_extraction, write_key, EmbedOutcome, EmbedSettings,
    FitnessConfig, LsbDepth, OptimizerKind, StegoError,
};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_KEY: i32 = 5;

/// Fixed default seed so published runs replay byte for byte.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "stegohawk",
    version,
    about = "Hide WAV audio inside lossless RGB images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hide a WAV payload inside a cover image
    Embed(EmbedArgs),
    /// Recover the audio from a stego image using its key file
    Extract(ExtractArgs),
    /// Compare a cover and a stego image
    Metrics(MetricsArgs),
    /// Run both optimizers over a cover corpus with fixed seeds
    Bench(BenchArgs),
}

#[derive(Args)]
struct PipelineFlags {
    /// SSIM weight in the fitness; PSNR gets 1 - alpha
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Population size
    #[arg(long, default_value_t = 30)]
    hawks: usize,
    /// Iteration cap per optimizer run
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    /// Bits replaced per selected slot (1 or 2)
    #[arg(long, default_value_t = 1)]
    lsb_depth: u8,
    /// Edge length of the variance blocks
    #[arg(long, default_value_t = 8)]
    block_size: u32,
    /// Fraction of highest-variance blocks eligible for embedding
    #[arg(long, default_value_t = 0.5)]
    variance_top_fraction: f64,
    /// Iterations without improvement before stopping early
    #[arg(long, default_value_t = 30)]
    stagnation_window: usize,
    /// Minimum improvement that counts as progress (0 disables early stop)
    #[arg(long, default_value_t = 1e-6)]
    stagnation_epsilon: f64,
}

impl PipelineFlags {
    fn to_settings(&self, optimizer: OptimizerKind, seed: u64) -> Result<EmbedSettings, CliError> {
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) {
            return Err(CliError::usage(format!(
                "--alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if !(self.variance_top_fraction > 0.0 && self.variance_top_fraction <= 1.0) {
            return Err(CliError::usage(format!(
                "--variance-top-fraction {} outside (0, 1]",
                self.variance_top_fraction
            )));
        }
        if self.block_size == 0 {
            return Err(CliError::usage("--block-size must be at least 1".into()));
        }
        if self.hawks < 2 {
            return Err(CliError::usage("--hawks must be at least 2".into()));
        }
        if self.max_iterations == 0 {
            return Err(CliError::usage("--max-iterations must be at least 1".into()));
        }
        let lsb_depth = LsbDepth::try_from_bits(self.lsb_depth)
            .map_err(|e| CliError::usage(format!("--lsb-depth: {e}")))?;
        Ok(EmbedSettings {
            optimizer,
            params: OptimizerParams {
                population_size: self.hawks,
                max_iterations: self.max_iterations,
                stagnation_window: self.stagnation_window,
                stagnation_epsilon: self.stagnation_epsilon,
                levy_beta: 1.5,
                seed,
            },
            fitness: FitnessConfig { alpha: self.alpha },
            lsb_depth,
            block_size: self.block_size,
            top_fraction: self.variance_top_fraction,
        })
    }
}

#[derive(Args)]
struct EmbedArgs {
    /// Cover image (PNG or BMP)
    #[arg(long)]
    cover: PathBuf,
    /// WAV payload to hide
    #[arg(long)]
    audio: PathBuf,
    /// Output stego PNG
    #[arg(long)]
    stego_out: PathBuf,
    /// Output key file
    #[arg(long)]
    key_out: PathBuf,
    /// Output JSON report (defaults to <stego-out>.report.json)
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Optional per-iteration history CSV
    #[arg(long)]
    history_out: Option<PathBuf>,
    /// Position optimizer
    #[arg(long, default_value = "hho")]
    optimizer: OptimizerKind,
    /// RNG seed
    #[arg(long, env = "STEGOHAWK_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    flags: PipelineFlags,
}

#[derive(Args)]
struct ExtractArgs {
    /// Stego image produced by embed
    #[arg(long)]
    stego: PathBuf,
    /// Key file produced by embed
    #[arg(long)]
    key: PathBuf,
    /// Output WAV path
    #[arg(long)]
    audio_out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    cover: PathBuf,
    #[arg(long)]
    stego: PathBuf,
    /// Report format
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of cover images (PNG/BMP)
    #[arg(long)]
    covers: PathBuf,
    /// WAV payload embedded into every cover
    #[arg(long)]
    audio: PathBuf,
    /// Comma-separated RNG seeds; every (cover, optimizer, seed) cell runs
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    /// Where to write the CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    flags: PipelineFlags,
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: String) -> Self {
        Self { code, message }
    }

    fn usage(message: String) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    fn io(message: String) -> Self {
        Self::new(EXIT_IO, message)
    }
}

fn exit_code_for(error: &StegoError) -> i32 {
    match error {
        StegoError::CapacityExceeded { .. } => EXIT_CAPACITY,
        StegoError::InvalidConfig(_)
        | StegoError::InvalidLsbDepth(_)
        | StegoError::Optimizer(OptimizerError::InvalidParams(_))
        | StegoError::Optimizer(OptimizerError::InvalidBounds(_))
        | StegoError::Image(ImageError::InvalidParameter(_))
        | StegoError::Metrics(MetricsError::DimensionMismatch(..))
        | StegoError::Metrics(MetricsError::ImageTooSmall(..)) => EXIT_USAGE,
        StegoError::KeyMismatch(_)
        | StegoError::MalformedKey(_)
        | StegoError::KeyVersionMismatch { .. }
        | StegoError::KeyChecksumMismatch
        | StegoError::Audio(AudioError::BadMagic)
        | StegoError::Audio(AudioError::VersionMismatch { .. })
        | StegoError::Audio(AudioError::LengthMismatch { .. })
        | StegoError::Audio(AudioError::ChecksumMismatch { .. }) => EXIT_KEY,
        _ => EXIT_IO,
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn load_cover(path: &Path) -> Result<RasterImage, CliError> {
    load_image(&read_file(path)?).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn load_audio(path: &Path) -> Result<AudioPayload, CliError> {
    parse_wav(&read_file(path)?).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct OptimizerReport<'a> {
    algorithm: String,
    seed: u64,
    population_size: usize,
    max_iterations: usize,
    alpha: f64,
    lsb_depth: u8,
    block_size: u32,
    variance_top_fraction: f64,
    iterations_run: usize,
    evaluations: u64,
    best_fitness: f64,
    history: &'a [f64],
}

#[derive(Serialize)]
struct EmbedReport<'a> {
    quality: &'a QualityReport,
    optimizer: OptimizerReport<'a>,
}

fn embed_report_json(
    settings: &EmbedSettings,
    outcome: &EmbedOutcome,
) -> Result<String, CliError> {
    let doc = EmbedReport {
        quality: &outcome.quality,
        optimizer: OptimizerReport {
            algorithm: settings.optimizer.to_string(),
            seed: settings.params.seed,
            population_size: settings.params.population_size,
            max_iterations: settings.params.max_iterations,
            alpha: settings.fitness.alpha,
            lsb_depth: settings.lsb_depth.bits(),
            block_size: settings.block_size,
            variance_top_fraction: settings.top_fraction,
            iterations_run: outcome.optimization.iterations_run,
            evaluations: outcome.optimization.evaluations,
            best_fitness: outcome.optimization.best_fitness,
            history: &outcome.optimization.history,
        },
    };
    serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::io(format!("cannot serialize report: {e}")))
}

fn cmd_embed(args: &EmbedArgs) -> Result<(), CliError> {
    let settings = args.flags.to_settings(args.optimizer, args.seed)?;
    let cover = load_cover(&args.cover)?;
    let audio = load_audio(&args.audio)?;

    let outcome = run_embedding(&cover, &audio, &settings)
        .map_err(|e| CliError::new(exit_code_for(&e), e.to_string()))?;

    write_file(&args.stego_out, &save_image(&outcome.stego))?;
    write_file(&args.key_out, &write_key(&outcome.key))?;
    let report_path = args
        .report_out
        .clone()
        .unwrap_or_else(|| args.stego_out.with_extension("report.json"));
    write_file(&report_path, embed_report_json(&settings, &outcome)?.as_bytes())?;
    if let Some(history_out) = &args.history_out {
        write_file(history_out, outcome.optimization.history_csv().as_bytes())?;
    }

    println!(
        "embedded {} payload bits into {}x{} cover: PSNR {} dB, SSIM {}, MSE {}",
        outcome.key.payload_bit_length(),
        cover.width(),
        cover.height(),
        outcome.quality.psnr,
        outcome.quality.ssim,
        outcome.quality.mse
    );
    Ok(())
}

fn cmd_extract(args: &ExtractArgs) -> Result<(), CliError> {
    let stego = load_cover(&args.stego)?;
    let key_bytes = read_file(&args.key)?;
    let key = read_key(&key_bytes)
        .map_err(|e| CliError::new(EXIT_KEY, format!("{}: {e}", args.key.display())))?;
    let audio = run_extraction(&stego, &key)
        .map_err(|e| CliError::new(exit_code_for(&e), e.to_string()))?;
    write_file(&args.audio_out, &write_wav(&audio))?;
    println!(
        "recovered {} data bytes ({} Hz, {} channel(s), {}-bit) to {}",
        audio.data().len(),
        audio.sample_rate(),
        audio.channels(),
        audio.bits_per_sample(),
        args.audio_out.display()
    );
    Ok(())
}

fn cmd_metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let cover = load_cover(&args.cover)?;
    let stego = load_cover(&args.stego)?;
    let report = QualityReport::compute(&cover, &stego)
        .map_err(|e| CliError::new(exit_code_for(&e.clone().into()), e.to_string()))?;
    let body = match args.format {
        ReportFormat::Json => serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::io(format!("cannot serialize report: {e}")))?,
        ReportFormat::Csv => format!("{}\n{}", QualityReport::CSV_HEADER, report.csv_row()),
    };
    match &args.out {
        Some(path) => write_file(path, body.as_bytes())?,
        None => println!("{body}"),
    }
    Ok(())
}

const BENCH_CSV_HEADER: &str =
    "cover,optimizer,seed,iterations_run,evaluations,best_fitness,psnr,ssim,elapsed_ms";

struct BenchRow {
    cover: String,
    optimizer: OptimizerKind,
    seed: u64,
    result: OptimizationResult,
    quality: QualityReport,
    elapsed_ms: u128,
}

impl BenchRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.cover,
            self.optimizer,
            self.seed,
            self.result.iterations_run,
            self.result.evaluations,
            self.result.best_fitness,
            self.quality.psnr,
            self.quality.ssim,
            self.elapsed_ms
        )
    }
}

fn bench_covers(dir: &Path) -> Result<Vec<(String, RasterImage)>, CliError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase),
                Some(ref ext) if ext == "png" || ext == "bmp"
            )
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::io(format!(
            "no cover images (.png/.bmp) in {}",
            dir.display()
        )));
    }
    let mut covers = Vec::with_capacity(paths.len());
    for path in paths {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        covers.push((name, load_cover(&path)?));
    }
    Ok(covers)
}

fn bench_run(
    cover: &RasterImage,
    audio: &AudioPayload,
    settings: &EmbedSettings,
) -> Result<(OptimizationResult, QualityReport, u128), CliError> {
    let started = Instant::now();
    let outcome = run_embedding(cover, audio, settings)
        .map_err(|e| CliError::new(exit_code_for(&e), e.to_string()))?;
    Ok((
        outcome.optimization,
        outcome.quality,
        started.elapsed().as_millis(),
    ))
}

fn median(sorted: &[f64]) -> f64 {
    sorted[sorted.len() / 2]
}

/// Every (cover, seed) cell runs HHO first, then random search with its
/// iteration cap matched to HHO's spent evaluation budget and early stop
/// disabled, so the comparison is evaluation-for-evaluation fair.
fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let covers = bench_covers(&args.covers)?;
    let audio = load_audio(&args.audio)?;
    let mut seeds = args.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();

    let mut rows: Vec<BenchRow> = Vec::new();
    for (name, cover) in &covers {
        for &seed in &seeds {
            let hho_settings = args.flags.to_settings(OptimizerKind::Hho, seed)?;
            let (hho_result, hho_quality, hho_ms) = bench_run(cover, &audio, &hho_settings)?;

            let mut random_settings = args.flags.to_settings(OptimizerKind::Random, seed)?;
            random_settings.params.max_iterations = (hho_result.evaluations as usize)
                .div_ceil(random_settings.params.population_size)
                .max(1);
            random_settings.params.stagnation_epsilon = 0.0;
            let (random_result, random_quality, random_ms) =
                bench_run(cover, &audio, &random_settings)?;

            rows.push(BenchRow {
                cover: name.clone(),
                optimizer: OptimizerKind::Hho,
                seed,
                result: hho_result,
                quality: hho_quality,
                elapsed_ms: hho_ms,
            });
            rows.push(BenchRow {
                cover: name.clone(),
                optimizer: OptimizerKind::Random,
                seed,
                result: random_result,
                quality: random_quality,
                elapsed_ms: random_ms,
            });
        }
    }
    rows.sort_by(|a, b| {
        (&a.cover, a.optimizer.to_string(), a.seed).cmp(&(
            &b.cover,
            b.optimizer.to_string(),
            b.seed,
        ))
    });

    let mut csv = String::from(BENCH_CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv());
        csv.push('\n');
    }
    match &args.out {
        Some(path) => write_file(path, csv.as_bytes())?,
        None => print!("{csv}"),
    }

    let mut hho_scores: Vec<f64> = rows
        .iter()
        .filter(|r| r.optimizer == OptimizerKind::Hho)
        .map(|r| r.result.best_fitness)
        .collect();
    let mut random_scores: Vec<f64> = rows
        .iter()
        .filter(|r| r.optimizer == OptimizerKind::Random)
        .map(|r| r.result.best_fitness)
        .collect();
    hho_scores.sort_by(f64::total_cmp);
    random_scores.sort_by(f64::total_cmp);
    println!(
        "median best_fitness: hho={} random={}",
        median(&hho_scores),
        median(&random_scores)
    );
    Ok(())
}

/// Parses arguments, runs the selected command, returns the process exit
/// code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Embed(args) => cmd_embed(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
