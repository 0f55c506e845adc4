//! Grid binning of geotagged images and their fused detections.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fusion::FusedPrediction;
use crate::geo::{GeoPoint, RoadSegmentScore};

/// Binning outcome: scored segments plus the images that could not be
/// placed on the map. Nothing is dropped silently.
#[derive(Debug)]
pub struct Binned {
    /// Sorted by grid cell (latitude index, then longitude index).
    pub segments: Vec<RoadSegmentScore>,
    /// Images without a GPS fix, plus images referenced by predictions but
    /// absent from the image listing. Sorted, no duplicates.
    pub unmapped_images: Vec<String>,
}

/// Assigns every geotagged image to the grid cell found by floor-dividing
/// its coordinates by `cell_size_deg`, then folds the image's predictions
/// into that cell's class counts and severity sum.
///
/// `images` maps every surveyed image to its GPS fix (or `None`);
/// `predictions` groups fused detections by image id. A cell's damage score
/// is its severity sum divided by `max(1, member image count)`, so cells
/// that exist only because a clean image was photographed there score 0.
pub fn bin_segments(
    images: &BTreeMap<String, Option<GeoPoint>>,
    predictions: &BTreeMap<String, Vec<FusedPrediction>>,
    cell_size_deg: f64,
) -> Result<Binned> {
    if !cell_size_deg.is_finite() || cell_size_deg <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cell size {cell_size_deg} must be a positive number of degrees"
        )));
    }

    let mut cells: BTreeMap<(i64, i64), Vec<&str>> = BTreeMap::new();
    let mut unmapped: Vec<String> = Vec::new();
    for (image_id, gps) in images {
        match gps {
            Some(point) => {
                let key = cell_index(*point, cell_size_deg);
                cells.entry(key).or_default().push(image_id);
            }
            None => unmapped.push(image_id.clone()),
        }
    }
    for image_id in predictions.keys() {
        if !images.contains_key(image_id) {
            unmapped.push(image_id.clone());
        }
    }
    unmapped.sort();
    unmapped.dedup();

    let mut segments = Vec::with_capacity(cells.len());
    for ((lat_idx, lon_idx), mut members) in cells {
        members.sort_unstable();
        let mut class_counts = [0u64; 4];
        let mut severity_sum = 0.0;
        for image_id in &members {
            if let Some(preds) = predictions.get(*image_id) {
                for p in preds {
                    class_counts[p.class.index()] += 1;
                    severity_sum += p.confidence.get();
                }
            }
        }
        let damage_score = severity_sum / members.len().max(1) as f64;
        segments.push(RoadSegmentScore {
            segment_id: format!("cell_{lat_idx}_{lon_idx}"),
            centroid: GeoPoint {
                lat: (lat_idx as f64 + 0.5) * cell_size_deg,
                lon: (lon_idx as f64 + 0.5) * cell_size_deg,
            },
            image_ids: members.into_iter().map(str::to_string).collect(),
            class_counts,
            severity_sum,
            damage_score,
        });
    }
    Ok(Binned {
        segments,
        unmapped_images: unmapped,
    })
}

fn cell_index(point: GeoPoint, cell_size_deg: f64) -> (i64, i64) {
    (
        (point.lat / cell_size_deg).floor() as i64,
        (point.lon / cell_size_deg).floor() as i64,
    )
}

/// Corner coordinates of a segment's grid cell, reconstructed from its
/// centroid: (lat_min, lon_min, lat_max, lon_max).
pub(crate) fn cell_bounds(segment: &RoadSegmentScore, cell_size_deg: f64) -> (f64, f64, f64, f64) {
    let half = cell_size_deg / 2.0;
    (
        segment.centroid.lat - half,
        segment.centroid.lon - half,
        segment.centroid.lat + half,
        segment.centroid.lon + half,
    )
}
