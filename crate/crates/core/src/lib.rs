//! Post-inference toolkit for road-distress detection surveys.
//!
//! Detectors run elsewhere and hand over their raw per-view outputs through
//! a line-based interchange format. This crate owns everything after that
//! point:
//!
//! - **De-augmentation** ([`tta`]): mapping detections from flipped and
//!   rescaled test-time views back into base image coordinates.
//! - **Ensemble fusion** ([`fusion`]): pooling the de-augmented detections
//!   of several models and collapsing duplicates with greedy NMS or
//!   confidence-weighted box averaging.
//! - **Scoring** ([`eval`]): precision/recall/F1 against ground truth and
//!   the exhaustive confidence × NMS threshold grid search.
//! - **Datasets** ([`dataset`]): annotation and metadata ingestion,
//!   deterministic train/validation splitting, corpus statistics, and the
//!   submission export.
//! - **Mapping** ([`geo`]): EXIF GPS extraction, grid binning of per-image
//!   damage into road segments, and GeoJSON/CSV/HTML export.
//!
//! All coordinate handling is continuous (`f64`); rounding happens only at
//! export boundaries. Every operation is a pure function over immutable
//! values, so batch layers parallelize freely.

pub mod dataset;
pub mod detection;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod geo;
pub mod tta;

#[cfg(any(test, feature = "test-fixtures"))]
pub mod fixtures;

pub use dataset::{
    compute_stats, export_submission, load_detections, load_ground_truth, load_image_meta,
    load_predictions, split_train_val, write_detections, write_fused, write_image_meta, Annotation,
    DatasetStats, GroundTruthRecord, LoadedGroundTruth,
};
pub use detection::{
    clamp_corners, BoundingBox, Confidence, Country, Detection, DistressClass, ImageMeta,
};
pub use error::{Error, Result};
pub use eval::{
    cap_per_image, grid_search, match_and_score, ClassTally, EvaluationReport, GridBest,
    GridSearchResult, DEFAULT_CONF_AXIS, DEFAULT_MATCH_IOU, DEFAULT_NMS_AXIS,
};
pub use fusion::{
    canonical_cmp, fuse_batch, fuse_image, nms, FusedPrediction, FusionConfig, FusionMode,
    ImageFailure, ImageTiming, TimingReport,
};
pub use geo::{
    bin_segments, export_geojson, export_html, export_table, extract_gps, Binned, ColorThresholds,
    GeoPoint, RoadSegmentScore,
};
pub use tta::{deaugment, forward_box, View, ViewManifest};
