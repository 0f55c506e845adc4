use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Args;
use roadfuse_core::{
    grid_search, load_detections, load_ground_truth, load_image_meta, FusionConfig, ViewManifest,
    DEFAULT_CONF_AXIS, DEFAULT_MATCH_IOU, DEFAULT_NMS_AXIS,
};

use crate::commands::{join_axis, with_jobs, ModeArg, ResolvedArgs};
use crate::runconfig::RunConfig;

#[derive(Args)]
pub struct GridArgs {
    /// Ground-truth corpus: a directory of VOC XML files, one XML file, or a CSV
    #[arg(long, value_name = "PATH")]
    pub gt: PathBuf,
    /// Raw detections in the interchange format
    #[arg(long, value_name = "FILE")]
    pub detections: PathBuf,
    /// View manifest CSV declaring the augmentations in play
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    /// Image metadata CSV
    #[arg(long, value_name = "FILE")]
    pub meta: PathBuf,
    /// Confidence thresholds to sweep (columns)
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CONF_AXIS)]
    pub conf_axis: Vec<f64>,
    /// NMS thresholds to sweep (rows)
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_NMS_AXIS)]
    pub nms_axis: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Nms)]
    pub mode: ModeArg,
    /// Suppress across classes instead of within each class
    #[arg(long)]
    pub class_agnostic: bool,
    /// IoU at or above which a same-class pair counts as a match
    #[arg(long, default_value_t = DEFAULT_MATCH_IOU)]
    pub match_iou: f64,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Write the F1 matrix to this CSV file
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Fail on annotations whose class is outside the four scored categories
    #[arg(long)]
    pub strict: bool,
}

pub fn run(args: &GridArgs) -> Result<ExitCode> {
    if !(0.0..=1.0).contains(&args.match_iou) {
        bail!("--match-iou must lie in [0, 1], got {}", args.match_iou);
    }
    let truth = load_ground_truth(&args.gt, args.strict)
        .with_context(|| format!("loading ground truth from {}", args.gt.display()))?;
    let manifest = ViewManifest::from_csv_path(&args.manifest)
        .with_context(|| format!("loading manifest {}", args.manifest.display()))?;
    let metas = load_image_meta(&args.meta)
        .with_context(|| format!("loading image metadata {}", args.meta.display()))?;
    let detections = load_detections(&args.detections, &manifest)
        .with_context(|| format!("loading detections {}", args.detections.display()))?;
    // Threshold fields of the template are swept per cell; only mode and
    // class-wise behavior carry through.
    let template =
        FusionConfig::new(0.25, 0.999, args.mode.to_core())?.with_class_wise(!args.class_agnostic);

    let result = with_jobs(args.jobs, || {
        grid_search(
            &detections,
            &manifest,
            &metas,
            &template,
            &truth.records,
            args.match_iou,
            &args.conf_axis,
            &args.nms_axis,
        )
    })?;

    print!("{}", result.render_table());
    println!(
        "best F1 {:.4} at conf {} nms {}",
        result.best.f1, result.best.conf_threshold, result.best.nms_threshold
    );

    if let Some(out) = &args.out {
        let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
        result.write_csv(BufWriter::new(file))?;
        let resolved = ResolvedArgs::new("grid")
            .flag("--gt", args.gt.display())
            .flag("--detections", args.detections.display())
            .flag("--manifest", args.manifest.display())
            .flag("--meta", args.meta.display())
            .flag("--conf-axis", join_axis(&args.conf_axis))
            .flag("--nms-axis", join_axis(&args.nms_axis))
            .flag("--mode", args.mode.as_str())
            .switch("--class-agnostic", args.class_agnostic)
            .flag("--match-iou", args.match_iou)
            .flag("--jobs", args.jobs)
            .flag("--out", out.display())
            .switch("--strict", args.strict)
            .finish();
        RunConfig::new(resolved).write_next_to(out)?;
    }
    Ok(ExitCode::SUCCESS)
}
