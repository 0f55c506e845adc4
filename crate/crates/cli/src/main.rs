//! `roadfuse`: command-line driver for the detection fusion toolkit.
//!
//! Exit codes: 0 on success, 2 on any input or usage error, 3 when
//! `fuse --enforce-budget` finds images over the latency budget.
//! Log verbosity follows the `RUST_LOG` environment variable.

mod commands;
mod runconfig;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "roadfuse",
    version,
    about = "Fuse, score, split and map road-distress detections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-country image and annotation counts from a ground-truth corpus
    Stats(commands::stats::StatsArgs),
    /// De-augment and fuse multi-model detections into per-image predictions
    Fuse(commands::fuse::FuseArgs),
    /// Score fused predictions against ground truth
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Exhaustive confidence x NMS threshold search
    Grid(commands::grid::GridArgs),
    /// Bin geotagged predictions into road segments and export map artifacts
    Map(commands::map::MapArgs),
    /// Deterministic train/validation split of an image-id list
    Split(commands::split::SplitArgs),
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Stats(args) => commands::stats::run(args),
        Command::Fuse(args) => commands::fuse::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Grid(args) => commands::grid::run(args),
        Command::Map(args) => commands::map::run(args),
        Command::Split(args) => commands::split::run(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
