//! Challenge submission export.
//!
//! One line per image: the image id, a comma, then space-joined
//! `class_index x_min y_min x_max y_max` groups with integer-rounded
//! pixels. Images without predictions keep their line with an empty
//! second field.

use std::io::Write;

use crate::error::Result;
use crate::fusion::FusedPrediction;

/// Writes fused predictions in submission layout, images sorted by id and
/// predictions by descending confidence within each image.
pub fn export_submission<W: Write>(
    mut w: W,
    fused: &[(String, Vec<FusedPrediction>)],
) -> Result<()> {
    let mut images: Vec<&(String, Vec<FusedPrediction>)> = fused.iter().collect();
    images.sort_by(|a, b| a.0.cmp(&b.0));
    for (image_id, preds) in images {
        let mut ordered: Vec<&FusedPrediction> = preds.iter().collect();
        ordered.sort_by(|a, b| {
            b.confidence
                .total_cmp(&a.confidence)
                .then_with(|| a.bbox.cmp_corners(&b.bbox))
                .then_with(|| a.class.cmp(&b.class))
        });
        let groups: Vec<String> = ordered
            .iter()
            .map(|p| {
                format!(
                    "{} {} {} {} {}",
                    p.class.submission_index(),
                    p.bbox.x_min().round() as i64,
                    p.bbox.y_min().round() as i64,
                    p.bbox.x_max().round() as i64,
                    p.bbox.y_max().round() as i64,
                )
            })
            .collect();
        writeln!(w, "{image_id},{}", groups.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::{BoundingBox, Confidence, DistressClass};

    fn pred(image_id: &str, class: DistressClass, conf: f64, x0: f64) -> FusedPrediction {
        FusedPrediction {
            image_id: image_id.to_string(),
            class,
            confidence: Confidence::new(conf).unwrap(),
            bbox: BoundingBox::new(x0, 20.4, x0 + 30.0, 40.5).unwrap(),
            contributor_count: 1,
        }
    }

    fn render(fused: &[(String, Vec<FusedPrediction>)]) -> String {
        let mut buf = Vec::new();
        export_submission(&mut buf, fused).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn lines_follow_the_submission_layout() {
        let fused = vec![(
            "Japan_000001.jpg".to_string(),
            vec![pred("Japan_000001.jpg", DistressClass::D00, 0.9, 10.2)],
        )];
        // 20.4 rounds down, 40.5 rounds up.
        assert_eq!(render(&fused), "Japan_000001.jpg,1 10 20 40 41\n");
    }

    #[test]
    fn images_sort_by_id_and_predictions_by_confidence() {
        let fused = vec![
            (
                "b.jpg".to_string(),
                vec![
                    pred("b.jpg", DistressClass::D40, 0.3, 100.0),
                    pred("b.jpg", DistressClass::D10, 0.8, 0.0),
                ],
            ),
            (
                "a.jpg".to_string(),
                vec![pred("a.jpg", DistressClass::D20, 0.5, 50.0)],
            ),
        ];
        let text = render(&fused);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a.jpg,3 50 20 80 41");
        assert_eq!(lines[1], "b.jpg,2 0 20 30 41 4 100 20 130 41");
    }

    #[test]
    fn empty_prediction_list_keeps_the_image_line() {
        let fused = vec![("empty.jpg".to_string(), vec![])];
        assert_eq!(render(&fused), "empty.jpg,\n");
    }

    #[test]
    fn class_indices_span_one_through_four() {
        let fused = vec![(
            "a.jpg".to_string(),
            vec![
                pred("a.jpg", DistressClass::D00, 0.9, 0.0),
                pred("a.jpg", DistressClass::D10, 0.8, 100.0),
                pred("a.jpg", DistressClass::D20, 0.7, 200.0),
                pred("a.jpg", DistressClass::D40, 0.6, 300.0),
            ],
        )];
        let text = render(&fused);
        let body = text.trim_end().split_once(',').unwrap().1;
        let indices: Vec<&str> = body.split(' ').step_by(5).collect();
        assert_eq!(indices, ["1", "2", "3", "4"]);
    }
}
