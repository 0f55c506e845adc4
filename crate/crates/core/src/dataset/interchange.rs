//! Line-delimited detection interchange format.
//!
//! One detection per line, nine space-separated fields in fixed order:
//!
//! ```text
//! image_id model_id view_id class confidence x_min y_min x_max y_max
//! ```
//!
//! Coordinates are view-space pixels. Files are UTF-8 with LF line endings.
//! Exports write confidence with six decimals and coordinates with two;
//! loading accepts any decimal notation. Fused predictions reuse the same
//! layout with `ensemble`/`identity` provenance so they can be re-loaded.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::detection::{BoundingBox, Confidence, Detection, DistressClass};
use crate::error::{at, Error, Result};
use crate::fusion::{canonical_cmp, FusedPrediction};
use crate::tta::{View, ViewManifest};

/// Loads an interchange file and groups detections by image id. Every
/// record is validated: class code, confidence range, box validity and
/// view-manifest membership.
pub fn load_detections(
    path: &Path,
    manifest: &ViewManifest,
) -> Result<BTreeMap<String, Vec<Detection>>> {
    let file = path.display().to_string();
    let content = fs::read_to_string(path)?;
    let mut groups: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
    for (idx, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let context = format!("line {}", idx + 1);
        let d = parse_line(line, &file, &context)?;
        manifest.require(d.view, &format!("{file}, {context}"))?;
        groups.entry(d.image_id.clone()).or_default().push(d);
    }
    Ok(groups)
}

/// Loads fused predictions from the same line layout. Provenance fields are
/// validated syntactically but not against a manifest; boxes are base-frame.
pub fn load_predictions(path: &Path) -> Result<Vec<FusedPrediction>> {
    let file = path.display().to_string();
    let content = fs::read_to_string(path)?;
    let mut preds = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let context = format!("line {}", idx + 1);
        let d = parse_line(line, &file, &context)?;
        preds.push(FusedPrediction {
            image_id: d.image_id,
            class: d.class,
            confidence: d.confidence,
            bbox: d.bbox,
            contributor_count: 1,
        });
    }
    Ok(preds)
}

fn parse_line(line: &str, file: &str, context: &str) -> Result<Detection> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 9 {
        return Err(Error::Parse {
            file: file.to_string(),
            context: context.to_string(),
            msg: format!("expected 9 fields, found {}", fields.len()),
        });
    }
    let class = fields[3]
        .parse::<DistressClass>()
        .map_err(|_| Error::UnknownClass {
            code: fields[3].to_string(),
            at: at(file, context),
        })?;
    let view = fields[2].parse::<View>().map_err(|_| Error::UnknownView {
        view_id: fields[2].to_string(),
        at: at(file, context),
    })?;
    let confidence: f64 = parse_number(fields[4], "confidence", file, context)?;
    let confidence = Confidence::new(confidence).map_err(|_| Error::ConfidenceOutOfRange {
        value: confidence,
        at: at(file, context),
    })?;
    let mut coords = [0.0f64; 4];
    for (i, name) in ["x_min", "y_min", "x_max", "y_max"].iter().enumerate() {
        coords[i] = parse_number(fields[5 + i], name, file, context)?;
    }
    let bbox =
        BoundingBox::new(coords[0], coords[1], coords[2], coords[3]).map_err(|e| Error::Parse {
            file: file.to_string(),
            context: context.to_string(),
            msg: e.to_string(),
        })?;
    Ok(Detection {
        image_id: fields[0].to_string(),
        model_id: fields[1].to_string(),
        view,
        class,
        confidence,
        bbox,
    })
}

fn parse_number(raw: &str, name: &str, file: &str, context: &str) -> Result<f64> {
    raw.parse().map_err(|_| Error::Parse {
        file: file.to_string(),
        context: context.to_string(),
        msg: format!("bad {name} value `{raw}`"),
    })
}

fn write_line<W: Write>(
    w: &mut W,
    image_id: &str,
    model_id: &str,
    view: &str,
    class: DistressClass,
    confidence: f64,
    bbox: &BoundingBox,
) -> std::io::Result<()> {
    writeln!(
        w,
        "{image_id} {model_id} {view} {class} {confidence:.6} {:.2} {:.2} {:.2} {:.2}",
        bbox.x_min(),
        bbox.y_min(),
        bbox.x_max(),
        bbox.y_max(),
    )
}

/// Writes grouped detections in canonical order: images by id, detections
/// by descending confidence with the full tie-break. Output bytes are a
/// pure function of the input set.
pub fn write_detections<W: Write>(
    mut w: W,
    groups: &BTreeMap<String, Vec<Detection>>,
) -> Result<()> {
    for dets in groups.values() {
        let mut ordered: Vec<&Detection> = dets.iter().collect();
        ordered.sort_by(|a, b| canonical_cmp(a, b));
        for d in ordered {
            write_line(
                &mut w,
                &d.image_id,
                &d.model_id,
                d.view.as_str(),
                d.class,
                d.confidence.get(),
                &d.bbox,
            )?;
        }
    }
    Ok(())
}

/// Writes fused predictions in the interchange layout under
/// `ensemble`/`identity` provenance, images by id, predictions in their
/// fused (confidence-descending) order.
pub fn write_fused<W: Write>(mut w: W, fused: &[(String, Vec<FusedPrediction>)]) -> Result<()> {
    for (image_id, preds) in fused {
        for p in preds {
            write_line(
                &mut w,
                image_id,
                "ensemble",
                "identity",
                p.class,
                p.confidence.get(),
                &p.bbox,
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dets.txt");
        fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn loads_and_groups_by_image() {
        let (_dir, path) = write_tmp(
            "b.jpg m1 identity D00 0.900000 10.00 20.00 30.00 40.00\n\
             a.jpg m2 hflip D40 0.500000 1.00 2.00 3.00 4.00\n\
             b.jpg m1 scale_130 D10 0.250000 13.00 26.00 39.00 52.00\n",
        );
        let groups = load_detections(&path, &ViewManifest::canonical()).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups["b.jpg"].len(), 2);
        let d = &groups["a.jpg"][0];
        assert_eq!(d.model_id, "m2");
        assert_eq!(d.view, View::HFlip);
        assert_eq!(d.class, DistressClass::D40);
        assert_eq!(d.confidence.get(), 0.5);
    }

    #[test]
    fn empty_file_loads_empty_map() {
        let (_dir, path) = write_tmp("");
        assert!(load_detections(&path, &ViewManifest::canonical())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn confidence_outside_range_is_rejected_with_location() {
        let (_dir, path) = write_tmp("a.jpg m1 identity D00 1.300000 1.00 2.00 3.00 4.00\n");
        let err = load_detections(&path, &ViewManifest::canonical()).unwrap_err();
        assert!(matches!(err, Error::ConfidenceOutOfRange { value, .. } if value == 1.3));
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn undeclared_view_is_rejected_against_the_manifest() {
        let (_dir, path) = write_tmp("a.jpg m1 hflip D00 0.500000 1.00 2.00 3.00 4.00\n");
        let err = load_detections(&path, &ViewManifest::identity_only()).unwrap_err();
        assert!(matches!(err, Error::UnknownView { ref view_id, .. } if view_id == "hflip"));
    }

    #[test]
    fn unknown_class_is_rejected() {
        let (_dir, path) = write_tmp("a.jpg m1 identity D43 0.500000 1.00 2.00 3.00 4.00\n");
        let err = load_detections(&path, &ViewManifest::canonical()).unwrap_err();
        assert!(matches!(err, Error::UnknownClass { ref code, .. } if code == "D43"));
    }

    #[test]
    fn field_count_errors_name_the_line() {
        let (_dir, path) = write_tmp(
            "a.jpg m1 identity D00 0.500000 1.00 2.00 3.00 4.00\n\
             a.jpg m1 identity D00 0.5\n",
        );
        let err = load_detections(&path, &ViewManifest::canonical()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn degenerate_box_is_rejected_at_load() {
        let (_dir, path) = write_tmp("a.jpg m1 identity D00 0.500000 5.00 2.00 5.00 4.00\n");
        assert!(load_detections(&path, &ViewManifest::canonical()).is_err());
    }

    #[test]
    fn load_write_load_round_trips() {
        let (_dir, path) = write_tmp(
            "b.jpg m1 identity D00 0.900000 10.00 20.00 30.00 40.00\n\
             a.jpg m2 hflip D40 0.500000 1.00 2.00 3.00 4.00\n\
             b.jpg m1 scale_130 D10 0.250000 13.00 26.00 39.00 52.00\n",
        );
        let manifest = ViewManifest::canonical();
        let groups = load_detections(&path, &manifest).unwrap();
        let mut buf = Vec::new();
        write_detections(&mut buf, &groups).unwrap();
        let rewritten = path.with_file_name("round.txt");
        fs::write(&rewritten, &buf).unwrap();
        let reloaded = load_detections(&rewritten, &manifest).unwrap();
        assert_eq!(groups, reloaded);

        // A second export of the reloaded set is byte-identical.
        let mut buf2 = Vec::new();
        write_detections(&mut buf2, &reloaded).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn export_order_is_canonical_regardless_of_input_order() {
        let mk = |conf: f64, x0: f64| {
            Detection::new(
                "a.jpg",
                "m1",
                View::Identity,
                DistressClass::D00,
                conf,
                BoundingBox::new(x0, 0.0, x0 + 10.0, 10.0).unwrap(),
            )
            .unwrap()
        };
        let mut forward = BTreeMap::new();
        forward.insert("a.jpg".to_string(), vec![mk(0.5, 0.0), mk(0.9, 50.0)]);
        let mut reversed = BTreeMap::new();
        reversed.insert("a.jpg".to_string(), vec![mk(0.9, 50.0), mk(0.5, 0.0)]);
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_detections(&mut buf_a, &forward).unwrap();
        write_detections(&mut buf_b, &reversed).unwrap();
        assert_eq!(buf_a, buf_b);
        let text = String::from_utf8(buf_a).unwrap();
        assert!(text.starts_with("a.jpg m1 identity D00 0.900000"));
    }

    #[test]
    fn fused_predictions_round_trip_through_the_same_layout() {
        let fused = vec![(
            "a.jpg".to_string(),
            vec![FusedPrediction {
                image_id: "a.jpg".to_string(),
                class: DistressClass::D20,
                confidence: Confidence::new(0.75).unwrap(),
                bbox: BoundingBox::new(10.0, 20.0, 30.0, 40.0).unwrap(),
                contributor_count: 7,
            }],
        )];
        let mut buf = Vec::new();
        write_fused(&mut buf, &fused).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "a.jpg ensemble identity D20 0.750000 10.00 20.00 30.00 40.00\n"
        );

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fused.txt");
        fs::write(&path, &buf).unwrap();
        let preds = load_predictions(&path).unwrap();
        assert_eq!(preds.len(), 1);
        assert_eq!(preds[0].class, DistressClass::D20);
        assert_eq!(preds[0].confidence.get(), 0.75);
        assert_eq!(preds[0].contributor_count, 1);
    }
}
