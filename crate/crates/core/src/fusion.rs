//! Ensemble fusion: pool de-augmented detections from every model and view,
//! then reduce duplicates either by greedy NMS or by confidence-weighted
//! box averaging.
//!
//! Everything here is deterministic. Detections are ranked by confidence
//! with a total tie-break on corners, model id, class and view, so the same
//! inputs produce the same outputs regardless of input order or thread count.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::detection::{BoundingBox, Confidence, Detection, DistressClass, ImageMeta};
use crate::error::{Error, Result};
use crate::tta::{deaugment, ViewManifest};

/// How pooled duplicates are reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionMode {
    /// Keep the highest-confidence box of each overlapping group.
    Nms,
    /// Replace each overlapping group by its confidence-weighted mean box.
    Average,
}

impl FusionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FusionMode::Nms => "nms",
            FusionMode::Average => "average",
        }
    }
}

/// Fusion parameters. The defaults are the strongest measured combination:
/// confidence cut 0.25 with NMS threshold 0.999, class-wise NMS.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    pub conf_threshold: f64,
    pub nms_threshold: f64,
    pub mode: FusionMode,
    pub class_wise: bool,
}

impl FusionConfig {
    pub fn new(conf_threshold: f64, nms_threshold: f64, mode: FusionMode) -> Result<Self> {
        if !conf_threshold.is_finite() || !(0.0..=1.0).contains(&conf_threshold) {
            return Err(Error::InvalidArgument(format!(
                "confidence threshold {conf_threshold} outside [0, 1]"
            )));
        }
        if !nms_threshold.is_finite() || !(nms_threshold > 0.0 && nms_threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "NMS threshold {nms_threshold} outside (0, 1]"
            )));
        }
        Ok(Self {
            conf_threshold,
            nms_threshold,
            mode,
            class_wise: true,
        })
    }

    pub fn with_class_wise(mut self, class_wise: bool) -> Self {
        self.class_wise = class_wise;
        self
    }
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            conf_threshold: 0.25,
            nms_threshold: 0.999,
            mode: FusionMode::Nms,
            class_wise: true,
        }
    }
}

/// One fused output box in base-frame coordinates. `contributor_count` is the
/// number of raw detections this box stands for (itself plus everything it
/// suppressed or absorbed).
#[derive(Debug, Clone, PartialEq)]
pub struct FusedPrediction {
    pub image_id: String,
    pub class: DistressClass,
    pub confidence: Confidence,
    pub bbox: BoundingBox,
    pub contributor_count: usize,
}

/// Confidence-descending order with a total tie-break: corners, model id,
/// class, view. Gives every detection list one canonical ranking.
pub fn canonical_cmp(a: &Detection, b: &Detection) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then_with(|| a.bbox.cmp_corners(&b.bbox))
        .then_with(|| a.model_id.cmp(&b.model_id))
        .then_with(|| a.class.cmp(&b.class))
        .then_with(|| a.view.index().cmp(&b.view.index()))
}

/// Greedy non-maximum suppression. Walks detections in canonical order and
/// drops every remaining detection whose IoU with a kept one strictly
/// exceeds `iou_threshold`; a pair at exactly the threshold survives. With
/// `class_wise` set, only same-class pairs suppress each other.
pub fn nms(detections: &[Detection], iou_threshold: f64, class_wise: bool) -> Vec<Detection> {
    nms_with_counts(detections, iou_threshold, class_wise)
        .into_iter()
        .map(|(d, _)| d)
        .collect()
}

fn nms_with_counts(
    detections: &[Detection],
    iou_threshold: f64,
    class_wise: bool,
) -> Vec<(Detection, usize)> {
    let mut order: Vec<&Detection> = detections.iter().collect();
    order.sort_by(|a, b| canonical_cmp(a, b));

    let mut suppressed = vec![false; order.len()];
    let mut kept = Vec::new();
    for i in 0..order.len() {
        if suppressed[i] {
            continue;
        }
        let mut absorbed = 1;
        for j in (i + 1)..order.len() {
            if suppressed[j] {
                continue;
            }
            if class_wise && order[j].class != order[i].class {
                continue;
            }
            if order[i].bbox.iou(&order[j].bbox) > iou_threshold {
                suppressed[j] = true;
                absorbed += 1;
            }
        }
        kept.push((order[i].clone(), absorbed));
    }
    kept
}

fn average_clusters(
    detections: &[Detection],
    iou_threshold: f64,
    class_wise: bool,
) -> Vec<FusedPrediction> {
    let mut order: Vec<&Detection> = detections.iter().collect();
    order.sort_by(|a, b| canonical_cmp(a, b));

    let mut used = vec![false; order.len()];
    let mut fused = Vec::new();
    for i in 0..order.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let seed = order[i];
        let mut members = vec![seed];
        for j in (i + 1)..order.len() {
            if used[j] {
                continue;
            }
            if class_wise && order[j].class != seed.class {
                continue;
            }
            if seed.bbox.iou(&order[j].bbox) >= iou_threshold {
                used[j] = true;
                members.push(order[j]);
            }
        }

        // A cluster of one is its own average; skipping the arithmetic keeps
        // the box bit-identical instead of drifting through (w*x)/w.
        if members.len() == 1 {
            fused.push(FusedPrediction {
                image_id: seed.image_id.clone(),
                class: seed.class,
                confidence: seed.confidence,
                bbox: seed.bbox,
                contributor_count: 1,
            });
            continue;
        }

        let weight_sum: f64 = members.iter().map(|d| d.confidence.get()).sum();
        let coord = |f: fn(&BoundingBox) -> f64| -> f64 {
            if weight_sum > 0.0 {
                members
                    .iter()
                    .map(|d| d.confidence.get() * f(&d.bbox))
                    .sum::<f64>()
                    / weight_sum
            } else {
                members.iter().map(|d| f(&d.bbox)).sum::<f64>() / members.len() as f64
            }
        };
        let bbox = BoundingBox::new(
            coord(BoundingBox::x_min),
            coord(BoundingBox::y_min),
            coord(BoundingBox::x_max),
            coord(BoundingBox::y_max),
        )
        .expect("mean of valid boxes is valid");
        let mean_conf =
            members.iter().map(|d| d.confidence.get()).sum::<f64>() / members.len() as f64;
        fused.push(FusedPrediction {
            image_id: seed.image_id.clone(),
            class: seed.class,
            confidence: Confidence::new(mean_conf.clamp(0.0, 1.0))
                .expect("mean of confidences stays in range"),
            bbox,
            contributor_count: members.len(),
        });
    }
    fused
}

/// Fuses every detection set of one image: de-augments view-space boxes into
/// the base frame, drops everything below the confidence cut, pools what is
/// left across models and views, and reduces duplicates per the configured
/// mode. Output is sorted confidence-descending.
pub fn fuse_image(
    sets: &[Vec<Detection>],
    manifest: &ViewManifest,
    meta: &ImageMeta,
    cfg: &FusionConfig,
) -> Result<Vec<FusedPrediction>> {
    let mut pool = Vec::new();
    for set in sets {
        for d in set {
            manifest.require(d.view, &format!("image {}", meta.image_id))?;
            let base = deaugment(d, d.view, meta)?;
            if base.confidence.get() >= cfg.conf_threshold {
                pool.push(base);
            }
        }
    }

    let mut fused = match cfg.mode {
        FusionMode::Nms => nms_with_counts(&pool, cfg.nms_threshold, cfg.class_wise)
            .into_iter()
            .map(|(d, contributor_count)| FusedPrediction {
                image_id: d.image_id,
                class: d.class,
                confidence: d.confidence,
                bbox: d.bbox,
                contributor_count,
            })
            .collect::<Vec<_>>(),
        FusionMode::Average => average_clusters(&pool, cfg.nms_threshold, cfg.class_wise),
    };

    fused.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then_with(|| a.bbox.cmp_corners(&b.bbox))
            .then_with(|| a.class.cmp(&b.class))
    });
    Ok(fused)
}

/// Wall-clock accounting for one batch. Per-image entries cover every
/// attempted image; failures are listed separately by id.
#[derive(Debug)]
pub struct TimingReport {
    pub per_image: Vec<ImageTiming>,
    pub max: Duration,
    pub median: Duration,
    pub failures: Vec<ImageFailure>,
}

#[derive(Debug, Clone)]
pub struct ImageTiming {
    pub image_id: String,
    pub elapsed: Duration,
}

#[derive(Debug)]
pub struct ImageFailure {
    pub image_id: String,
    pub error: Error,
}

impl TimingReport {
    fn from_parts(per_image: Vec<ImageTiming>, failures: Vec<ImageFailure>) -> Self {
        let mut sorted: Vec<Duration> = per_image.iter().map(|t| t.elapsed).collect();
        sorted.sort();
        let max = sorted.last().copied().unwrap_or(Duration::ZERO);
        let median = match sorted.len() {
            0 => Duration::ZERO,
            n if n % 2 == 1 => sorted[n / 2],
            n => (sorted[n / 2 - 1] + sorted[n / 2]) / 2,
        };
        Self {
            per_image,
            max,
            median,
            failures,
        }
    }
}

/// Fuses a whole batch, one image at a time, in parallel on the current
/// rayon pool. Images are independent; output keeps the canonical order of
/// the input map, so results do not depend on scheduling. Per-image errors
/// are collected into the report instead of aborting the batch.
pub fn fuse_batch(
    batch: &BTreeMap<String, Vec<Detection>>,
    manifest: &ViewManifest,
    metas: &BTreeMap<String, ImageMeta>,
    cfg: &FusionConfig,
) -> (Vec<(String, Vec<FusedPrediction>)>, TimingReport) {
    let entries: Vec<(&String, &Vec<Detection>)> = batch.iter().collect();
    let outcomes: Vec<(String, Result<Vec<FusedPrediction>>, Duration)> = entries
        .par_iter()
        .map(|(image_id, dets)| {
            let started = Instant::now();
            let result = match metas.get(*image_id) {
                Some(meta) => fuse_image(std::slice::from_ref(*dets), manifest, meta, cfg),
                None => Err(Error::MissingMeta {
                    image_id: (*image_id).clone(),
                }),
            };
            ((*image_id).clone(), result, started.elapsed())
        })
        .collect();

    let mut fused = Vec::new();
    let mut timings = Vec::new();
    let mut failures = Vec::new();
    for (image_id, result, elapsed) in outcomes {
        timings.push(ImageTiming {
            image_id: image_id.clone(),
            elapsed,
        });
        match result {
            Ok(preds) => fused.push((image_id, preds)),
            Err(error) => failures.push(ImageFailure { image_id, error }),
        }
    }
    (fused, TimingReport::from_parts(timings, failures))
}
