//! Property tests: the algorithmic core checked against independent
//! reference implementations and algebraic invariants.

use std::collections::BTreeMap;

use proptest::prelude::*;

use roadfuse_core::fixtures::{jpeg_with_gps, synthetic_scene};
use roadfuse_core::{
    bin_segments, canonical_cmp, deaugment, extract_gps, forward_box, fuse_batch, fuse_image,
    match_and_score, nms, split_train_val, Annotation, BoundingBox, ClassTally, Detection,
    DistressClass, FusedPrediction, FusionConfig, FusionMode, GroundTruthRecord, ImageMeta, View,
    ViewManifest,
};

fn view_strategy() -> impl Strategy<Value = View> {
    prop::sample::select(View::ALL.to_vec())
}

/// Detections on a coarse coordinate lattice so random pairs overlap often.
fn arb_detection() -> impl Strategy<Value = Detection> {
    (
        0usize..4,
        0u8..3,
        0u32..10,
        0u32..10,
        1u32..8,
        1u32..8,
        0u32..=100,
    )
        .prop_map(|(class, model, x0, y0, w, h, conf)| {
            Detection::new(
                "img.jpg",
                format!("m{model}"),
                View::Identity,
                DistressClass::ALL[class],
                conf as f64 / 100.0,
                BoundingBox::new(
                    x0 as f64 * 10.0,
                    y0 as f64 * 10.0,
                    (x0 + w) as f64 * 10.0,
                    (y0 + h) as f64 * 10.0,
                )
                .unwrap(),
            )
            .unwrap()
        })
}

fn arb_detections(max: usize) -> impl Strategy<Value = Vec<Detection>> {
    prop::collection::vec(arb_detection(), 0..max)
}

/// A frame size plus a box guaranteed to fit inside it.
fn arb_frame_box() -> impl Strategy<Value = (u32, u32, BoundingBox)> {
    (2u32..1500, 2u32..1500).prop_flat_map(|(w, h)| {
        let (wf, hf) = (w as f64, h as f64);
        (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_map(move |(a, b, c, d)| {
            let x_min = a * (wf - 1.0);
            let y_min = b * (hf - 1.0);
            let x_max = x_min + 0.5 + c * (wf - x_min - 0.5);
            let y_max = y_min + 0.5 + d * (hf - y_min - 0.5);
            (w, h, BoundingBox::new(x_min, y_min, x_max, y_max).unwrap())
        })
    })
}

/// Declarative restatement of greedy NMS, written without the suppression
/// bookkeeping of the production code: an item survives exactly when no
/// earlier survivor overlaps it past the threshold.
fn reference_nms(detections: &[Detection], threshold: f64, class_wise: bool) -> Vec<Detection> {
    let mut pool: Vec<&Detection> = detections.iter().collect();
    pool.sort_by(|a, b| canonical_cmp(a, b));
    let mut kept: Vec<&Detection> = Vec::new();
    'candidates: for d in pool {
        for k in &kept {
            let comparable = !class_wise || k.class == d.class;
            if comparable && k.bbox.iou(&d.bbox) > threshold {
                continue 'candidates;
            }
        }
        kept.push(d);
    }
    kept.into_iter().cloned().collect()
}

/// Intersection-over-union recomputed by counting unit lattice cells, valid
/// for integer-cornered boxes.
fn lattice_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let cells = |bb: &BoundingBox| -> Vec<(i64, i64)> {
        let (x0, y0, x1, y1) = (
            bb.x_min() as i64,
            bb.y_min() as i64,
            bb.x_max() as i64,
            bb.y_max() as i64,
        );
        (x0..x1)
            .flat_map(|x| (y0..y1).map(move |y| (x, y)))
            .collect()
    };
    let ca = cells(a);
    let cb: std::collections::BTreeSet<(i64, i64)> = cells(b).into_iter().collect();
    let inter = ca.iter().filter(|c| cb.contains(c)).count();
    let union = ca.len() + cb.len() - inter;
    inter as f64 / union as f64
}

fn identity_fusion_inputs() -> (ViewManifest, ImageMeta) {
    (
        ViewManifest::canonical(),
        ImageMeta::new("img.jpg", 600, 600).unwrap(),
    )
}

type PredShape = (DistressClass, (f64, f64, f64, f64), f64);

/// Strips the contributor count, which legitimately differs when
/// sub-threshold contributors vanish.
fn shape_of(preds: &[FusedPrediction]) -> Vec<PredShape> {
    preds
        .iter()
        .map(|p| (p.class, p.bbox.corners(), p.confidence.get()))
        .collect()
}

proptest! {
    #[test]
    fn iou_is_symmetric_and_bounded(a in arb_detection(), b in arb_detection()) {
        let ab = a.bbox.iou(&b.bbox);
        let ba = b.bbox.iou(&a.bbox);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(a.bbox.iou(&a.bbox), 1.0);
    }

    #[test]
    fn iou_matches_the_lattice_count(a in arb_detection(), b in arb_detection()) {
        let analytic = a.bbox.iou(&b.bbox);
        let counted = lattice_iou(&a.bbox, &b.bbox);
        prop_assert!((analytic - counted).abs() < 1e-12,
            "analytic {analytic} vs lattice {counted}");
    }

    #[test]
    fn nms_agrees_with_the_reference(
        dets in arb_detections(12),
        threshold in prop::sample::select(vec![0.3, 0.5, 0.9, 0.999]),
        class_wise in any::<bool>(),
    ) {
        let fast = nms(&dets, threshold, class_wise);
        let reference = reference_nms(&dets, threshold, class_wise);
        prop_assert_eq!(fast, reference);
    }

    #[test]
    fn nms_output_is_a_subset_with_no_conflicting_pair(
        dets in arb_detections(16),
        threshold in prop::sample::select(vec![0.3, 0.5, 0.9]),
    ) {
        let kept = nms(&dets, threshold, true);
        prop_assert!(kept.len() <= dets.len());
        for k in &kept {
            prop_assert!(dets.contains(k));
        }
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                if a.class == b.class {
                    prop_assert!(a.bbox.iou(&b.bbox) <= threshold);
                }
            }
        }
    }

    #[test]
    fn nms_ignores_input_order(
        (dets, shuffled) in arb_detections(16)
            .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
        threshold in prop::sample::select(vec![0.3, 0.5, 0.9]),
    ) {
        prop_assert_eq!(nms(&dets, threshold, true), nms(&shuffled, threshold, true));
    }

    #[test]
    fn tta_round_trip_stays_within_half_a_pixel(
        (w, h, bbox) in arb_frame_box(),
        view in view_strategy(),
    ) {
        let meta = ImageMeta::new("img.jpg", w, h).unwrap();
        let projected = forward_box(&bbox, view, &meta);
        let det = Detection::new("img.jpg", "m0", view, DistressClass::D00, 0.5, projected)
            .unwrap();
        let back = deaugment(&det, view, &meta).unwrap();
        let (x0, y0, x1, y1) = bbox.corners();
        let (rx0, ry0, rx1, ry1) = back.bbox.corners();
        for (orig, round) in [(x0, rx0), (y0, ry0), (x1, rx1), (y1, ry1)] {
            prop_assert!((orig - round).abs() <= 0.5, "{orig} vs {round} via {view}");
        }
    }

    #[test]
    fn deaugmented_boxes_land_inside_the_frame(
        (w, h, bbox) in arb_frame_box(),
        view in view_strategy(),
        stretch in 1.0..2.0f64,
    ) {
        // Stretch the view-space box so it can overhang the frame; the
        // inverse map must clamp it back inside (or reject it outright).
        let meta = ImageMeta::new("img.jpg", w, h).unwrap();
        let (x0, y0, x1, y1) = bbox.corners();
        let overhang = BoundingBox::new(x0, y0, x1 * stretch, y1 * stretch).unwrap();
        let det = Detection::new("img.jpg", "m0", view, DistressClass::D00, 0.5, overhang)
            .unwrap();
        if let Ok(back) = deaugment(&det, view, &meta) {
            let (bx0, by0, bx1, by1) = back.bbox.corners();
            prop_assert!(bx0 >= 0.0 && by0 >= 0.0);
            prop_assert!(bx1 <= w as f64 && by1 <= h as f64);
            prop_assert!(bx0 < bx1 && by0 < by1);
        }
    }

    #[test]
    fn fusion_ignores_detection_order(
        (dets, shuffled) in arb_detections(20)
            .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
        mode in prop::sample::select(vec![FusionMode::Nms, FusionMode::Average]),
    ) {
        let (manifest, meta) = identity_fusion_inputs();
        let cfg = FusionConfig::new(0.0, 0.5, mode).unwrap();
        let a = fuse_image(std::slice::from_ref(&dets), &manifest, &meta, &cfg).unwrap();
        let b = fuse_image(std::slice::from_ref(&shuffled), &manifest, &meta, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn fusion_ignores_how_sets_are_partitioned(
        dets in arb_detections(20),
        cut in 0usize..=20,
    ) {
        let (manifest, meta) = identity_fusion_inputs();
        let cfg = FusionConfig::default();
        let cut = cut.min(dets.len());
        let split = [dets[..cut].to_vec(), dets[cut..].to_vec()];
        let joined = fuse_image(std::slice::from_ref(&dets), &manifest, &meta, &cfg).unwrap();
        let parted = fuse_image(&split, &manifest, &meta, &cfg).unwrap();
        prop_assert_eq!(joined, parted);
    }

    #[test]
    fn raising_the_confidence_floor_only_removes_predictions(
        dets in arb_detections(24),
        lo in 0u32..50,
        delta in 1u32..50,
    ) {
        let (manifest, meta) = identity_fusion_inputs();
        let lo = lo as f64 / 100.0;
        let hi = lo + delta as f64 / 100.0;
        let cfg_lo = FusionConfig::new(lo, 0.5, FusionMode::Nms).unwrap();
        let cfg_hi = FusionConfig::new(hi, 0.5, FusionMode::Nms).unwrap();
        let fused_lo = fuse_image(std::slice::from_ref(&dets), &manifest, &meta, &cfg_lo).unwrap();
        let fused_hi = fuse_image(std::slice::from_ref(&dets), &manifest, &meta, &cfg_hi).unwrap();
        // The higher floor yields exactly the lower floor's survivors that
        // clear it: trailing low-confidence detections can never alter how
        // the more confident ones suppress each other.
        let expected: Vec<_> = fused_lo
            .iter()
            .filter(|p| p.confidence.get() >= hi)
            .cloned()
            .collect();
        prop_assert_eq!(shape_of(&fused_hi), shape_of(&expected));
    }

    #[test]
    fn split_partitions_and_sizes_by_floor(
        n in 0usize..300,
        fraction in 0.01..0.99f64,
        seed in any::<u64>(),
    ) {
        let items: Vec<usize> = (0..n).collect();
        let (train, val) = split_train_val(items, fraction, seed).unwrap();
        prop_assert_eq!(val.len(), (fraction * n as f64).floor() as usize);
        let mut all: Vec<usize> = train.iter().chain(val.iter()).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn f1_equals_the_count_identity(
        tp in 0u64..500,
        fp in 0u64..500,
        fn_ in 0u64..500,
    ) {
        let tally = ClassTally {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
        };
        let denom = 2 * tp + fp + fn_;
        let direct = if denom == 0 { 0.0 } else { 2.0 * tp as f64 / denom as f64 };
        prop_assert!((tally.f1() - direct).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&tally.f1()));
    }

    #[test]
    fn matching_is_one_to_one_and_order_blind(
        dets in arb_detections(16),
        gt_dets in arb_detections(8),
    ) {
        let annotations: Vec<Annotation> = gt_dets
            .iter()
            .map(|d| Annotation { class: d.class, bbox: d.bbox })
            .collect();
        let gt_len = annotations.len();
        let truth = vec![GroundTruthRecord {
            meta: ImageMeta::new("img.jpg", 600, 600).unwrap(),
            annotations,
        }];
        let preds: Vec<FusedPrediction> = dets
            .iter()
            .map(|d| FusedPrediction {
                image_id: d.image_id.clone(),
                class: d.class,
                confidence: d.confidence,
                bbox: d.bbox,
                contributor_count: 1,
            })
            .collect();
        let report = match_and_score(&preds, &truth, 0.5);
        let total = report.aggregate();
        prop_assert!(total.true_positives <= gt_len as u64);
        prop_assert!(total.true_positives <= preds.len() as u64);
        prop_assert_eq!(
            total.true_positives + total.false_positives,
            preds.len() as u64
        );
        prop_assert_eq!(
            total.true_positives + total.false_negatives,
            gt_len as u64
        );

        let mut reversed = preds.clone();
        reversed.reverse();
        prop_assert_eq!(match_and_score(&reversed, &truth, 0.5), report);
    }

    #[test]
    fn hemisphere_refs_negate_coordinates(
        deg in 0u32..89,
        min in 0u32..60,
        sec_hundredths in 0u32..6000,
    ) {
        let dms = [(deg, 1), (min, 1), (sec_hundredths, 100)];
        let north_east = extract_gps(&jpeg_with_gps(dms, b'N', dms, b'E'))
            .unwrap()
            .unwrap();
        let south_west = extract_gps(&jpeg_with_gps(dms, b'S', dms, b'W'))
            .unwrap()
            .unwrap();
        prop_assert_eq!(south_west.lat, -north_east.lat);
        prop_assert_eq!(south_west.lon, -north_east.lon);
        let expected = deg as f64 + min as f64 / 60.0 + sec_hundredths as f64 / 100.0 / 3600.0;
        prop_assert!((north_east.lat - expected).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_fused_detection_lands_in_exactly_one_bucket(
        images in 1usize..10,
        models in 1usize..3,
        per_view in 1usize..3,
        seed in any::<u64>(),
    ) {
        let scene = synthetic_scene(images, models, per_view, seed);
        let cfg = FusionConfig::default();
        let (fused, report) = fuse_batch(&scene.detections, &scene.manifest, &scene.metas, &cfg);
        prop_assert!(report.failures.is_empty());

        let predictions: BTreeMap<String, Vec<FusedPrediction>> = fused.into_iter().collect();
        let gps: BTreeMap<String, Option<_>> = scene
            .metas
            .iter()
            .map(|(id, m)| (id.clone(), m.gps))
            .collect();
        let binned = bin_segments(&gps, &predictions, 0.00025).unwrap();

        let mapped: u64 = binned.segments.iter().map(|s| s.total_detections()).sum();
        let unmapped: u64 = binned
            .unmapped_images
            .iter()
            .map(|id| predictions.get(id).map_or(0, |p| p.len() as u64))
            .sum();
        let total: u64 = predictions.values().map(|p| p.len() as u64).sum();
        prop_assert_eq!(mapped + unmapped, total);

        let image_total: usize = binned.segments.iter().map(|s| s.image_ids.len()).sum();
        prop_assert_eq!(
            image_total + binned.unmapped_images.len(),
            scene.metas.len()
        );
    }
}
