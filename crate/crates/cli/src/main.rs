//! `tbs`: simulations, verification suites and benchmarks for temporally
//! biased stream samplers.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "tbs", version, about = "Temporally biased stream sampling toolkit")]
struct Cli {
    /// Root seed; every random draw is derived from it.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample-size trajectories, averaged over replications.
    Simulate(SimulateArgs),
    /// Run a verification suite and report each check.
    Verify(VerifyArgs),
    /// Partitioned R-TBS with per-step network cost.
    Distsim(DistsimArgs),
    /// Model retraining under drift.
    Ml(MlArgs),
    /// Exact and empirical appearance probabilities of one downsampling step.
    DownsampleCheck(DownsampleArgs),
    /// Single-node throughput.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Comma-separated samplers: btbs, brs, ttbs, rtbs, bchao, sw.
    #[arg(long, default_value = "rtbs")]
    pub algo: String,
    /// deterministic:B | uniform:LO,HI | grow:PHI[@ONSET] | decay:PHI[@ONSET]
    #[arg(long, default_value = "deterministic:100")]
    pub batch: String,
    /// Items per step before a geometric law kicks in.
    #[arg(long, default_value_t = 100)]
    pub base: usize,
    #[arg(long, default_value_t = 400)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    /// Items present at time 0 (btbs, ttbs and rtbs only).
    #[arg(long, default_value_t = 0)]
    pub initial: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long)]
    pub suite: String,
    /// Directory for data files emitted by the suites.
    #[arg(long)]
    pub artifacts: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DistsimArgs {
    #[arg(long, default_value_t = 8)]
    pub partitions: usize,
    /// cent-kv-rj | cent-kv-cj | cent-cp | dist-cp | all
    #[arg(long, default_value = "all")]
    pub strategy: String,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Batch-size law, as for `simulate --batch`.
    #[arg(long, default_value = "uniform:0,200")]
    pub batch_gen: String,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct MlArgs {
    /// knn | regression
    #[arg(long, default_value = "knn")]
    pub task: String,
    /// Comma-separated policies (rtbs, sw, unif) or `all`.
    #[arg(long, default_value = "all")]
    pub policy: String,
    #[arg(long, default_value_t = 0.07)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// periodic:D,E | single:START,END
    #[arg(long, default_value = "periodic:10,10")]
    pub pattern: String,
    #[arg(long, default_value = "deterministic:100")]
    pub batch: String,
    #[arg(long, default_value_t = 30)]
    pub reps: u64,
    /// Scored steps after warm-up.
    #[arg(long, default_value_t = 100)]
    pub steps: u32,
    #[arg(long, default_value_t = 100)]
    pub warmup: u32,
}

#[derive(Args, Debug)]
pub struct DownsampleArgs {
    /// Current latent weight, as a decimal (integer part at most 6).
    #[arg(long)]
    pub from: String,
    /// Target weight, strictly between 0 and `from`.
    #[arg(long)]
    pub to: String,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated samplers.
    #[arg(long, default_value = "btbs,brs,ttbs,rtbs,bchao,sw")]
    pub algo: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value = "deterministic:100")]
    pub batch: String,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.07)]
    pub lambda: f64,
}

/// Global options shared by every command.
pub struct Globals {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub enum Outcome {
    Ok,
    ChecksFailed,
}

fn is_usage_error(e: &anyhow::Error) -> bool {
    use tbs_core::Error;
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::InvalidParameter(_) | Error::Parse(_) | Error::TargetOutOfRange { .. })
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let g = Globals { seed: cli.seed, out: cli.out, format: cli.format };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&g, &a),
        Command::Verify(a) => commands::verify(&g, &a),
        Command::Distsim(a) => commands::distsim(&g, &a),
        Command::Ml(a) => commands::ml(&g, &a),
        Command::DownsampleCheck(a) => commands::downsample_check(&g, &a),
        Command::Bench(a) => commands::bench(&g, &a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage_error(&e) { 2 } else { 1 })
        }
    }
}
