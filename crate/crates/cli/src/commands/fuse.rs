use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use roadfuse_core::{
    fuse_batch, load_detections, load_image_meta, write_fused, FusionConfig, ViewManifest,
};

use crate::commands::{with_jobs, ModeArg, ResolvedArgs};
use crate::runconfig::RunConfig;

#[derive(Args)]
pub struct FuseArgs {
    /// Raw detections in the interchange format
    #[arg(long, value_name = "FILE")]
    pub detections: PathBuf,
    /// View manifest CSV declaring the augmentations in play
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    /// Image metadata CSV
    #[arg(long, value_name = "FILE")]
    pub meta: PathBuf,
    /// Output file for fused predictions
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Confidence floor applied before suppression
    #[arg(long, default_value_t = 0.25)]
    pub conf: f64,
    /// IoU threshold above which overlapping boxes collapse
    #[arg(long, default_value_t = 0.999)]
    pub nms: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Nms)]
    pub mode: ModeArg,
    /// Suppress across classes instead of within each class
    #[arg(long)]
    pub class_agnostic: bool,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Per-image latency budget in milliseconds
    #[arg(long, default_value_t = 10.0)]
    pub budget_ms: f64,
    /// Exit with code 3 when any image exceeds the budget
    #[arg(long)]
    pub enforce_budget: bool,
}

pub fn run(args: &FuseArgs) -> Result<ExitCode> {
    let manifest = ViewManifest::from_csv_path(&args.manifest)
        .with_context(|| format!("loading manifest {}", args.manifest.display()))?;
    let metas = load_image_meta(&args.meta)
        .with_context(|| format!("loading image metadata {}", args.meta.display()))?;
    let detections = load_detections(&args.detections, &manifest)
        .with_context(|| format!("loading detections {}", args.detections.display()))?;
    let cfg = FusionConfig::new(args.conf, args.nms, args.mode.to_core())?
        .with_class_wise(!args.class_agnostic);

    let (fused, timing) = with_jobs(args.jobs, || {
        fuse_batch(&detections, &manifest, &metas, &cfg)
    });

    let file =
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_fused(BufWriter::new(file), &fused)?;

    let resolved = ResolvedArgs::new("fuse")
        .flag("--detections", args.detections.display())
        .flag("--manifest", args.manifest.display())
        .flag("--meta", args.meta.display())
        .flag("--out", args.out.display())
        .flag("--conf", args.conf)
        .flag("--nms", args.nms)
        .flag("--mode", args.mode.as_str())
        .switch("--class-agnostic", args.class_agnostic)
        .flag("--jobs", args.jobs)
        .flag("--budget-ms", args.budget_ms)
        .switch("--enforce-budget", args.enforce_budget)
        .finish();
    RunConfig::new(resolved).write_next_to(&args.out)?;

    println!(
        "fused {} image(s): median {:.3} ms, max {:.3} ms per image",
        fused.len(),
        timing.median.as_secs_f64() * 1e3,
        timing.max.as_secs_f64() * 1e3,
    );

    // Failed images never abort the batch: results for the rest are already
    // on disk, the failures are named here, and the exit code flags the run.
    if !timing.failures.is_empty() {
        for failure in &timing.failures {
            eprintln!("error: image {}: {}", failure.image_id, failure.error);
        }
        eprintln!("error: {} image(s) failed to fuse", timing.failures.len());
        return Ok(ExitCode::from(2));
    }

    let over: Vec<_> = timing
        .per_image
        .iter()
        .filter(|t| t.elapsed.as_secs_f64() * 1e3 > args.budget_ms)
        .collect();
    if !over.is_empty() {
        println!(
            "over_budget {} image(s) exceed {} ms",
            over.len(),
            args.budget_ms
        );
        for t in &over {
            println!("  {} {:.3} ms", t.image_id, t.elapsed.as_secs_f64() * 1e3);
        }
        if args.enforce_budget {
            return Ok(ExitCode::from(3));
        }
    }
    Ok(ExitCode::SUCCESS)
}
