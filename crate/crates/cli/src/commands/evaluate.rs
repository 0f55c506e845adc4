use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Args;
use roadfuse_core::{
    cap_per_image, load_ground_truth, load_predictions, match_and_score, DistressClass,
    EvaluationReport, FusedPrediction, DEFAULT_MATCH_IOU,
};

use crate::commands::ResolvedArgs;
use crate::runconfig::RunConfig;

#[derive(Args)]
pub struct EvaluateArgs {
    /// Ground-truth corpus: a directory of VOC XML files, one XML file, or a CSV
    #[arg(long, value_name = "PATH")]
    pub gt: PathBuf,
    /// Fused predictions in the interchange format
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// IoU at or above which a same-class pair counts as a match
    #[arg(long, default_value_t = DEFAULT_MATCH_IOU)]
    pub match_iou: f64,
    /// Keep only the N most confident predictions per image
    #[arg(long, value_name = "N")]
    pub max_per_image: Option<usize>,
    /// Also write the report table to this CSV file
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Fail on annotations whose class is outside the four scored categories
    #[arg(long)]
    pub strict: bool,
}

fn report_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("class,tp,fp,fn,precision,recall,f1\n");
    let mut row = |label: &str, t: &roadfuse_core::ClassTally| {
        writeln!(
            out,
            "{label},{},{},{},{:.4},{:.4},{:.4}",
            t.true_positives,
            t.false_positives,
            t.false_negatives,
            t.precision(),
            t.recall(),
            t.f1(),
        )
        .expect("string formatting");
    };
    for class in DistressClass::ALL {
        row(class.as_str(), report.tally_for(class));
    }
    row("all", &report.aggregate());
    out
}

pub fn run(args: &EvaluateArgs) -> Result<ExitCode> {
    if !(0.0..=1.0).contains(&args.match_iou) {
        bail!("--match-iou must lie in [0, 1], got {}", args.match_iou);
    }
    let truth = load_ground_truth(&args.gt, args.strict)
        .with_context(|| format!("loading ground truth from {}", args.gt.display()))?;
    if truth.skipped_annotations > 0 {
        log::warn!(
            "skipped {} annotation(s) with out-of-scope class codes",
            truth.skipped_annotations
        );
    }
    let mut predictions = load_predictions(&args.pred)
        .with_context(|| format!("loading predictions {}", args.pred.display()))?;
    if let Some(max) = args.max_per_image {
        let mut grouped: BTreeMap<String, Vec<FusedPrediction>> = BTreeMap::new();
        for p in predictions {
            grouped.entry(p.image_id.clone()).or_default().push(p);
        }
        let mut grouped: Vec<(String, Vec<FusedPrediction>)> = grouped.into_iter().collect();
        cap_per_image(&mut grouped, max);
        predictions = grouped.into_iter().flat_map(|(_, v)| v).collect();
    }

    let report = match_and_score(&predictions, &truth.records, args.match_iou);
    let table = report_csv(&report);
    print!("{table}");
    println!("F1 {:.4}", report.aggregate().f1());

    if let Some(out) = &args.out {
        fs::write(out, &table).with_context(|| format!("writing {}", out.display()))?;
        let mut resolved = ResolvedArgs::new("evaluate")
            .flag("--gt", args.gt.display())
            .flag("--pred", args.pred.display())
            .flag("--match-iou", args.match_iou);
        if let Some(max) = args.max_per_image {
            resolved = resolved.flag("--max-per-image", max);
        }
        let resolved = resolved
            .flag("--out", out.display())
            .switch("--strict", args.strict)
            .finish();
        RunConfig::new(resolved).write_next_to(out)?;
    }
    Ok(ExitCode::SUCCESS)
}
