//! Detection scoring (precision / recall / F1) and the confidence × NMS
//! threshold grid search.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::GroundTruthRecord;
use crate::detection::{Detection, DistressClass, ImageMeta};
use crate::error::{Error, Result};
use crate::fusion::{fuse_image, FusedPrediction, FusionConfig};
use crate::tta::ViewManifest;

/// Matching threshold used when none is requested: a prediction counts as a
/// true positive when its IoU with an unmatched ground-truth box of the same
/// class is at least this value.
pub const DEFAULT_MATCH_IOU: f64 = 0.5;

/// Default confidence-threshold axis, ascending.
pub const DEFAULT_CONF_AXIS: [f64; 5] = [0.10, 0.15, 0.20, 0.25, 0.30];

/// Default NMS-threshold axis, descending.
pub const DEFAULT_NMS_AXIS: [f64; 6] = [0.999, 0.99, 0.95, 0.90, 0.85, 0.80];

/// Match counts for one class (or the aggregate over all classes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassTally {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

impl ClassTally {
    /// TP/(TP+FP), or 0 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        let denom = self.true_positives + self.false_positives;
        if denom == 0 {
            0.0
        } else {
            self.true_positives as f64 / denom as f64
        }
    }

    /// TP/(TP+FN), or 0 when there was nothing to find.
    pub fn recall(&self) -> f64 {
        let denom = self.true_positives + self.false_negatives;
        if denom == 0 {
            0.0
        } else {
            self.true_positives as f64 / denom as f64
        }
    }

    /// Harmonic mean of precision and recall, 0 when both are 0.
    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

/// Scoring result: one tally per distress class plus the threshold used.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub match_iou: f64,
    pub per_class: [ClassTally; 4],
}

impl EvaluationReport {
    /// Micro-aggregate: counts summed over all classes.
    pub fn aggregate(&self) -> ClassTally {
        let mut total = ClassTally::default();
        for tally in &self.per_class {
            total.true_positives += tally.true_positives;
            total.false_positives += tally.false_positives;
            total.false_negatives += tally.false_negatives;
        }
        total
    }

    pub fn tally_for(&self, class: DistressClass) -> &ClassTally {
        &self.per_class[class.index()]
    }
}

/// Greedy confidence-ordered matching of predictions against ground truth.
///
/// Within each image and class, predictions are visited in descending
/// confidence order; each one claims the still-unmatched ground-truth box
/// with the highest IoU, provided that IoU reaches `match_iou`. Claimed
/// pairs are true positives, leftover predictions false positives, leftover
/// ground-truth boxes false negatives. Predictions for images absent from
/// the ground-truth set count as false positives.
pub fn match_and_score(
    predictions: &[FusedPrediction],
    ground_truth: &[GroundTruthRecord],
    match_iou: f64,
) -> EvaluationReport {
    let mut by_image: BTreeMap<&str, Vec<&FusedPrediction>> = BTreeMap::new();
    for p in predictions {
        by_image.entry(p.image_id.as_str()).or_default().push(p);
    }

    let mut per_class = [ClassTally::default(); 4];
    let mut known_images: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
    for record in ground_truth {
        known_images.insert(record.meta.image_id.as_str());
        let image_preds = by_image.get(record.meta.image_id.as_str());
        for class in DistressClass::ALL {
            let tally = &mut per_class[class.index()];
            let gt_boxes: Vec<_> = record
                .annotations
                .iter()
                .filter(|a| a.class == class)
                .collect();
            let mut preds: Vec<&FusedPrediction> = image_preds
                .map(|v| v.iter().filter(|p| p.class == class).copied().collect())
                .unwrap_or_default();
            // Canonical visit order makes the greedy outcome independent of
            // input order.
            preds.sort_by(|a, b| {
                b.confidence
                    .total_cmp(&a.confidence)
                    .then_with(|| a.bbox.cmp_corners(&b.bbox))
            });

            let mut claimed = vec![false; gt_boxes.len()];
            for p in preds {
                let mut best: Option<(usize, f64)> = None;
                for (gi, g) in gt_boxes.iter().enumerate() {
                    if claimed[gi] {
                        continue;
                    }
                    let iou = p.bbox.iou(&g.bbox);
                    if best.is_none_or(|(_, prev)| iou > prev) {
                        best = Some((gi, iou));
                    }
                }
                match best {
                    Some((gi, iou)) if iou >= match_iou => {
                        claimed[gi] = true;
                        tally.true_positives += 1;
                    }
                    _ => tally.false_positives += 1,
                }
            }
            tally.false_negatives += claimed.iter().filter(|&&c| !c).count() as u64;
        }
    }

    // Whatever was predicted for images outside the ground-truth set cannot
    // match anything.
    for (image_id, preds) in &by_image {
        if !known_images.contains(image_id) {
            for p in preds {
                per_class[p.class.index()].false_positives += 1;
            }
        }
    }

    EvaluationReport {
        match_iou,
        per_class,
    }
}

/// Truncates each image's predictions to its `max` most confident ones.
/// Useful when a submission target caps detections per image.
pub fn cap_per_image(fused: &mut [(String, Vec<FusedPrediction>)], max: usize) {
    for (_, preds) in fused.iter_mut() {
        preds.sort_by(|a, b| {
            b.confidence
                .total_cmp(&a.confidence)
                .then_with(|| a.bbox.cmp_corners(&b.bbox))
                .then_with(|| a.class.cmp(&b.class))
        });
        preds.truncate(max);
    }
}

/// The winning grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBest {
    pub conf_threshold: f64,
    pub nms_threshold: f64,
    pub f1: f64,
}

/// F1 surface over the (confidence × NMS) threshold plane. Rows follow
/// `nms_axis`, columns follow `conf_axis`, both in the order requested.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub conf_axis: Vec<f64>,
    pub nms_axis: Vec<f64>,
    pub f1: Vec<Vec<f64>>,
    pub best: GridBest,
}

impl GridSearchResult {
    /// CSV matrix: NMS label column, one confidence column per axis entry,
    /// cells with four decimals.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = self.conf_axis.iter().map(|c| c.to_string()).collect();
        writeln!(w, "nms_threshold,{}", header.join(","))?;
        for (row, nms) in self.nms_axis.iter().enumerate() {
            let cells: Vec<String> = self.f1[row].iter().map(|v| format!("{v:.4}")).collect();
            writeln!(w, "{nms},{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Fixed-width table for terminal output.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:>13}", "nms \\ conf"));
        for c in &self.conf_axis {
            out.push_str(&format!("{:>9}", c.to_string()));
        }
        out.push('\n');
        for (row, nms) in self.nms_axis.iter().enumerate() {
            out.push_str(&format!("{:>13}", nms.to_string()));
            for v in &self.f1[row] {
                out.push_str(&format!("{:>9.4}", v));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the fuse-then-score pipeline once per `(conf, nms)` cell and
/// collects the aggregate F1 surface. Cells run in parallel; any failure
/// inside a cell is reported with the cell's thresholds. On F1 ties the
/// earliest cell wins, scanning rows (NMS axis) then columns.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    detections: &BTreeMap<String, Vec<Detection>>,
    manifest: &ViewManifest,
    metas: &BTreeMap<String, ImageMeta>,
    template: &FusionConfig,
    ground_truth: &[GroundTruthRecord],
    match_iou: f64,
    conf_axis: &[f64],
    nms_axis: &[f64],
) -> Result<GridSearchResult> {
    if conf_axis.is_empty() || nms_axis.is_empty() {
        return Err(Error::InvalidArgument(
            "grid axes must be non-empty".to_string(),
        ));
    }

    let cells: Vec<(usize, usize)> = (0..nms_axis.len())
        .flat_map(|row| (0..conf_axis.len()).map(move |col| (row, col)))
        .collect();
    let scores: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(row, col)| {
            let conf = conf_axis[col];
            let nms = nms_axis[row];
            let cell_err = |msg: String| Error::GridCell { conf, nms, msg };
            let cfg = FusionConfig::new(conf, nms, template.mode)
                .map_err(|e| cell_err(e.to_string()))?
                .with_class_wise(template.class_wise);
            let mut preds = Vec::new();
            for (image_id, dets) in detections {
                let meta = metas
                    .get(image_id)
                    .ok_or_else(|| cell_err(format!("no metadata for image {image_id}")))?;
                let fused = fuse_image(std::slice::from_ref(dets), manifest, meta, &cfg)
                    .map_err(|e| cell_err(e.to_string()))?;
                preds.extend(fused);
            }
            Ok(match_and_score(&preds, ground_truth, match_iou)
                .aggregate()
                .f1())
        })
        .collect();

    let mut f1 = vec![vec![0.0; conf_axis.len()]; nms_axis.len()];
    for (&(row, col), score) in cells.iter().zip(scores) {
        f1[row][col] = score?;
    }

    let mut best = GridBest {
        conf_threshold: conf_axis[0],
        nms_threshold: nms_axis[0],
        f1: f1[0][0],
    };
    for (row, nms) in nms_axis.iter().enumerate() {
        for (col, conf) in conf_axis.iter().enumerate() {
            if f1[row][col] > best.f1 {
                best = GridBest {
                    conf_threshold: *conf,
                    nms_threshold: *nms,
                    f1: f1[row][col],
                };
            }
        }
    }

    Ok(GridSearchResult {
        conf_axis: conf_axis.to_vec(),
        nms_axis: nms_axis.to_vec(),
        f1,
        best,
    })
}
