use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use roadfuse_core::{compute_stats, load_ground_truth};

use crate::commands::ResolvedArgs;
use crate::runconfig::RunConfig;

#[derive(Args)]
pub struct StatsArgs {
    /// Ground-truth corpus: a directory of VOC XML files, one XML file, or a CSV
    #[arg(long, value_name = "PATH")]
    pub gt: PathBuf,
    /// Also write the CSV table to this file
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Fail on annotations whose class is outside the four scored categories
    #[arg(long)]
    pub strict: bool,
}

pub fn run(args: &StatsArgs) -> Result<ExitCode> {
    let loaded = load_ground_truth(&args.gt, args.strict)
        .with_context(|| format!("loading ground truth from {}", args.gt.display()))?;
    if loaded.skipped_annotations > 0 {
        log::warn!(
            "skipped {} annotation(s) with out-of-scope class codes",
            loaded.skipped_annotations
        );
    }
    let stats = compute_stats(&loaded.records)?;
    stats.write_csv(io::stdout().lock())?;

    if let Some(out) = &args.out {
        let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
        stats.write_csv(BufWriter::new(file))?;
        let resolved = ResolvedArgs::new("stats")
            .flag("--gt", args.gt.display())
            .flag("--out", out.display())
            .switch("--strict", args.strict)
            .finish();
        RunConfig::new(resolved).write_next_to(out)?;
    }
    Ok(ExitCode::SUCCESS)
}
