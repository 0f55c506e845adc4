use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Args;
use roadfuse_core::{
    bin_segments, export_geojson, export_html, export_table, extract_gps, load_predictions,
    ColorThresholds, FusedPrediction, GeoPoint,
};

use crate::commands::ResolvedArgs;
use crate::runconfig::RunConfig;

#[derive(Args)]
pub struct MapArgs {
    /// Directory of geotagged survey JPEGs
    #[arg(long, value_name = "DIR")]
    pub images: PathBuf,
    /// Fused predictions in the interchange format
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Grid cell edge length in degrees
    #[arg(long, default_value_t = 0.00025)]
    pub cell_size: f64,
    #[arg(long, value_name = "FILE")]
    pub out_geojson: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out_csv: PathBuf,
    /// Optional self-contained HTML preview
    #[arg(long, value_name = "FILE")]
    pub out_html: Option<PathBuf>,
    /// Damage score above which a segment renders yellow
    #[arg(long, default_value_t = 0.25)]
    pub yellow: f64,
    /// Damage score above which a segment renders red
    #[arg(long, default_value_t = 0.75)]
    pub red: f64,
}

/// JPEG files of `dir` in name order, keyed by file name.
fn scan_images(dir: &PathBuf) -> Result<BTreeMap<String, Option<GeoPoint>>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading image directory {}", dir.display()))?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|entry| entry.path())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("jpg") || e.eq_ignore_ascii_case("jpeg"))
        })
        .collect();
    paths.sort();

    let mut gps = BTreeMap::new();
    for path in paths {
        let bytes = fs::read(&path).with_context(|| format!("reading image {}", path.display()))?;
        let point = extract_gps(&bytes)
            .with_context(|| format!("extracting GPS from {}", path.display()))?;
        let image_id = path
            .file_name()
            .expect("directory entries have names")
            .to_string_lossy()
            .into_owned();
        gps.insert(image_id, point);
    }
    Ok(gps)
}

pub fn run(args: &MapArgs) -> Result<ExitCode> {
    if !(args.yellow.is_finite() && args.red.is_finite() && 0.0 <= args.yellow) {
        bail!("color thresholds must be finite and non-negative");
    }
    if args.yellow > args.red {
        bail!(
            "--yellow ({}) must not exceed --red ({})",
            args.yellow,
            args.red
        );
    }

    let gps = scan_images(&args.images)?;
    let flat = load_predictions(&args.pred)
        .with_context(|| format!("loading predictions {}", args.pred.display()))?;
    let mut predictions: BTreeMap<String, Vec<FusedPrediction>> = BTreeMap::new();
    for p in flat {
        predictions.entry(p.image_id.clone()).or_default().push(p);
    }

    let binned = bin_segments(&gps, &predictions, args.cell_size)?;
    let colors = ColorThresholds {
        yellow: args.yellow,
        red: args.red,
    };

    let geojson_file = File::create(&args.out_geojson)
        .with_context(|| format!("creating {}", args.out_geojson.display()))?;
    export_geojson(
        BufWriter::new(geojson_file),
        &binned.segments,
        args.cell_size,
        &colors,
    )?;
    let csv_file = File::create(&args.out_csv)
        .with_context(|| format!("creating {}", args.out_csv.display()))?;
    export_table(BufWriter::new(csv_file), &binned.segments)?;
    if let Some(out_html) = &args.out_html {
        let html_file =
            File::create(out_html).with_context(|| format!("creating {}", out_html.display()))?;
        export_html(
            BufWriter::new(html_file),
            &binned.segments,
            args.cell_size,
            &colors,
        )?;
    }

    let mut resolved = ResolvedArgs::new("map")
        .flag("--images", args.images.display())
        .flag("--pred", args.pred.display())
        .flag("--cell-size", args.cell_size)
        .flag("--out-geojson", args.out_geojson.display())
        .flag("--out-csv", args.out_csv.display());
    if let Some(out_html) = &args.out_html {
        resolved = resolved.flag("--out-html", out_html.display());
    }
    let resolved = resolved
        .flag("--yellow", args.yellow)
        .flag("--red", args.red)
        .finish();
    RunConfig::new(resolved).write_next_to(&args.out_geojson)?;

    let mapped: u64 = binned.segments.iter().map(|s| s.total_detections()).sum();
    println!("segments {}", binned.segments.len());
    println!("mapped_detections {mapped}");
    println!("unmapped_images {}", binned.unmapped_images.len());
    Ok(ExitCode::SUCCESS)
}
