use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use roadfuse_core::split_train_val;

use crate::commands::ResolvedArgs;
use crate::runconfig::RunConfig;

#[derive(Args)]
pub struct SplitArgs {
    /// Text file with one image id per line
    #[arg(long, value_name = "FILE")]
    pub ids: PathBuf,
    /// Fraction of ids moved to the validation set
    #[arg(long, default_value_t = 0.02)]
    pub val_fraction: f64,
    /// Shuffle seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out_train: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out_val: PathBuf,
}

fn write_ids(path: &Path, ids: &[String]) -> Result<()> {
    let mut body = ids.join("\n");
    if !body.is_empty() {
        body.push('\n');
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

pub fn run(args: &SplitArgs) -> Result<ExitCode> {
    let content = fs::read_to_string(&args.ids)
        .with_context(|| format!("reading id list {}", args.ids.display()))?;
    let ids: Vec<String> = content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();

    let (train, val) = split_train_val(ids, args.val_fraction, args.seed)?;
    write_ids(&args.out_train, &train)?;
    write_ids(&args.out_val, &val)?;

    let resolved = ResolvedArgs::new("split")
        .flag("--ids", args.ids.display())
        .flag("--val-fraction", args.val_fraction)
        .flag("--seed", args.seed)
        .flag("--out-train", args.out_train.display())
        .flag("--out-val", args.out_val.display())
        .finish();
    RunConfig::new(resolved).write_next_to(&args.out_train)?;

    println!("train {} val {}", train.len(), val.len());
    Ok(ExitCode::SUCCESS)
}
