mod bench;
mod errors;
mod gaps;
mod io;

use std::fs::File;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use gapfill_core::gap::GapSpec;
use gapfill_core::pipeline::{inpaint_signal, MethodSpec, PipelineConfig};

use crate::errors::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "gapfill",
    version,
    about = "Fill gaps in audio by sparse time-frequency optimization or AR interpolation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restore the gaps of one WAV file.
    Inpaint(InpaintArgs),
    /// Run a batch experiment described by a JSON spec, emitting CSV rows.
    Bench(BenchArgs),
    /// Aggregate a results CSV into mean SNR per (gap length, method).
    Summarize {
        /// Results CSV produced by `bench`.
        csv: PathBuf,
    },
}

#[derive(Args)]
struct InpaintArgs {
    /// Input WAV (16-bit int or 32-bit float; first channel of multichannel).
    input: PathBuf,
    /// Gap as 1-based `start:length` in samples; repeatable.
    #[arg(long = "gap", value_name = "START:LEN")]
    gap: Vec<String>,
    /// JSON sidecar: { "gaps": [{"start": s, "length": h}], "sample_rate": r }.
    #[arg(long = "gaps-file", value_name = "JSON")]
    gaps_file: Option<PathBuf>,
    /// Sparse model: syn (synthesis) or ana (analysis).
    #[arg(long, default_value = "syn")]
    model: String,
    /// Atom weighting: none, supp, abs, norm, energy or iterative.
    #[arg(long, default_value = "energy")]
    weights: String,
    /// Lattice alignment: none, half or full.
    #[arg(long, default_value = "half")]
    offset: String,
    /// Enable the gradual cascade with this edge-step fraction (0, 0.5].
    #[arg(long = "gradual-step", value_name = "FRACTION")]
    gradual_step: Option<f64>,
    /// Compensate the gap's energy drop with artificial-gap calibration.
    #[arg(long)]
    tdc: bool,
    /// Artificial gaps used by --tdc.
    #[arg(long = "tdc-gaps", default_value_t = 4, value_name = "N")]
    tdc_gaps: usize,
    /// Energy-progression segments used by --tdc.
    #[arg(long = "tdc-segments", default_value_t = 10, value_name = "M")]
    tdc_segments: usize,
    /// Full method descriptor, overriding the flags above
    /// (e.g. "janssen" or "ana:norm:half:grad=0.125:tdc").
    #[arg(long)]
    method: Option<String>,
    /// Window length in samples.
    #[arg(long, default_value_t = 2800)]
    window: usize,
    /// Hop between adjacent windows.
    #[arg(long, default_value_t = 700)]
    hop: usize,
    /// Frequency channels per window.
    #[arg(long, default_value_t = 2800)]
    channels: usize,
    /// Solver relative-change stopping tolerance.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    /// Solver iteration cap.
    #[arg(long = "max-iterations", default_value_t = 1000)]
    max_iterations: usize,
    /// Output WAV path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment spec (JSON).
    spec: PathBuf,
    /// Results CSV path; falls back to the spec's "output" field.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn method_from_args(args: &InpaintArgs) -> Result<MethodSpec> {
    let descriptor = match &args.method {
        Some(m) => m.clone(),
        None => {
            let mut d = format!("{}:{}:{}", args.model, args.weights, args.offset);
            if let Some(f) = args.gradual_step {
                d.push_str(&format!(":grad={f}"));
            }
            if args.tdc {
                d.push_str(":tdc");
            }
            d
        }
    };
    descriptor
        .parse::<MethodSpec>()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run_inpaint(args: &InpaintArgs) -> Result<()> {
    let method = method_from_args(args)?;
    let mut audio = io::read_wav(&args.input)?;
    let mut gap_list: Vec<GapSpec> = Vec::new();
    if let Some(path) = &args.gaps_file {
        gap_list.extend(gaps::load_sidecar(path, audio.sample_rate)?);
    }
    for arg in &args.gap {
        gap_list.push(gaps::parse_gap_arg(arg)?);
    }
    if gap_list.is_empty() {
        return Err(CliError::Usage(
            "no gaps given; use --gap start:length or --gaps-file".into(),
        ));
    }
    let mut config = PipelineConfig {
        window_length: args.window,
        hop: args.hop,
        channels: args.channels,
        ..PipelineConfig::default()
    };
    config.solver.tolerance = args.tolerance;
    config.solver.max_iterations = args.max_iterations;
    config.reweight.solver = config.solver;
    config.tdc.num_artificial_gaps = args.tdc_gaps;
    config.tdc.num_segments = args.tdc_segments;
    let (restored, reports) = inpaint_signal(&audio.samples, &gap_list, &method, &config)?;
    for report in &reports {
        eprintln!(
            "gap {}:{} method {} iterations {} converged {}",
            report.gap.start,
            report.gap.len(),
            method,
            report.iterations,
            report.converged
        );
    }
    audio.samples = restored;
    io::write_wav(&args.output, &audio)?;
    Ok(())
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.spec)?;
    let spec: bench::ExperimentSpec = serde_json::from_str(&text)?;
    let out_path = args
        .output
        .clone()
        .or_else(|| spec.output.clone().map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("no output path: pass -o or set \"output\"".into()))?;
    let out = File::create(&out_path)?;
    bench::run_experiment(&spec, out)?;
    Ok(())
}

fn run_summarize(csv: &PathBuf) -> Result<()> {
    let rows = bench::summarize(File::open(csv)?)?;
    bench::write_summary(&rows, std::io::stdout().lock())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match &cli.command {
        Command::Inpaint(args) => run_inpaint(args),
        Command::Bench(args) => run_bench(args),
        Command::Summarize { csv } => run_summarize(csv),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
