//! Corpus ingestion and export: ground-truth annotations, detection
//! interchange files, image metadata, the train/validation split, corpus
//! statistics and the competition submission format.

mod ground_truth;
mod interchange;
mod meta;
mod split;
mod stats;
mod submission;

pub use ground_truth::{load_ground_truth, Annotation, GroundTruthRecord, LoadedGroundTruth};
pub use interchange::{load_detections, load_predictions, write_detections, write_fused};
pub use meta::{load_image_meta, write_image_meta};
pub use split::split_train_val;
pub use stats::{compute_stats, DatasetStats};
pub use submission::export_submission;
