//! Road-quality mapping: GPS extraction, grid binning and map export.
//!
//! Every geotagged frame falls into one grid cell (a "road segment"); the
//! confidences of its fused detections act as a crude severity proxy. A
//! segment's damage score is its severity sum divided by the number of
//! member images, so heavily photographed streets are not over-counted.

mod exif;
mod export;
mod segments;

pub use exif::extract_gps;
pub use export::{export_geojson, export_html, export_table, ColorThresholds};
pub use segments::{bin_segments, Binned};

use crate::error::{Error, Result};

/// WGS84 coordinate in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !lat.is_finite() || !lon.is_finite() || lat.abs() > 90.0 || lon.abs() > 180.0 {
            return Err(Error::InvalidCoordinate { lat, lon });
        }
        Ok(Self { lat, lon })
    }
}

/// Aggregated damage picture of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadSegmentScore {
    /// Deterministic id derived from the grid cell indices.
    pub segment_id: String,
    /// Center of the grid cell.
    pub centroid: GeoPoint,
    /// Images whose GPS fix falls inside the cell, sorted by id.
    pub image_ids: Vec<String>,
    /// Detection counts per class, indexed like [`crate::DistressClass::ALL`].
    pub class_counts: [u64; 4],
    /// Sum of member detection confidences.
    pub severity_sum: f64,
    /// `severity_sum / max(1, member image count)`.
    pub damage_score: f64,
}

impl RoadSegmentScore {
    pub fn n_images(&self) -> usize {
        self.image_ids.len()
    }

    pub fn total_detections(&self) -> u64 {
        self.class_counts.iter().sum()
    }
}
