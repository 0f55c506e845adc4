//! Core detection types: boxes, classes, confidences and per-image metadata.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::tta::View;

/// Axis-aligned box in pixel coordinates, `x_min < x_max` and `y_min < y_max`,
/// all corners finite and non-negative. Coordinates stay continuous; nothing
/// here snaps to the pixel grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let corners = [x_min, y_min, x_max, y_max];
        if corners.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBox(format!(
                "non-finite corner in ({x_min}, {y_min}, {x_max}, {y_max})"
            )));
        }
        if x_min < 0.0 || y_min < 0.0 {
            return Err(Error::InvalidBox(format!(
                "negative corner in ({x_min}, {y_min}, {x_max}, {y_max})"
            )));
        }
        if x_min >= x_max || y_min >= y_max {
            return Err(Error::InvalidBox(format!(
                "zero or negative extent in ({x_min}, {y_min}, {x_max}, {y_max})"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (self.x_min, self.y_min, self.x_max, self.y_max)
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    /// Intersection over union. Disjoint or merely edge-touching pairs score 0.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let iw = (self.x_max.min(other.x_max) - self.x_min.max(other.x_min)).max(0.0);
        let ih = (self.y_max.min(other.y_max) - self.y_min.max(other.y_min)).max(0.0);
        let inter = iw * ih;
        if inter <= 0.0 {
            return 0.0;
        }
        inter / (self.area() + other.area() - inter)
    }

    /// Clips the box to `[0, width] x [0, height]`.
    pub fn clamp_to_image(&self, meta: &ImageMeta) -> Result<Self> {
        clamp_corners(self.x_min, self.y_min, self.x_max, self.y_max, meta)
    }

    /// Total order on corner tuples, used for deterministic tie-breaking.
    pub fn cmp_corners(&self, other: &BoundingBox) -> std::cmp::Ordering {
        self.x_min
            .total_cmp(&other.x_min)
            .then_with(|| self.y_min.total_cmp(&other.y_min))
            .then_with(|| self.x_max.total_cmp(&other.x_max))
            .then_with(|| self.y_max.total_cmp(&other.y_max))
    }
}

/// Clips raw corners (possibly out of frame, possibly negative) to the image
/// and constructs the resulting box. De-augmented detections land here before
/// anything downstream sees them.
pub fn clamp_corners(
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
    meta: &ImageMeta,
) -> Result<BoundingBox> {
    if [x_min, y_min, x_max, y_max].iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidBox(format!(
            "non-finite corner in ({x_min}, {y_min}, {x_max}, {y_max})"
        )));
    }
    let w = f64::from(meta.width);
    let h = f64::from(meta.height);
    let x0 = x_min.clamp(0.0, w);
    let y0 = y_min.clamp(0.0, h);
    let x1 = x_max.clamp(0.0, w);
    let y1 = y_max.clamp(0.0, h);
    if x0 >= x1 || y0 >= y1 {
        return Err(Error::DegenerateBox {
            image_id: meta.image_id.clone(),
            width: meta.width,
            height: meta.height,
        });
    }
    BoundingBox::new(x0, y0, x1, y1)
}

/// Detection score, guaranteed inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Confidence(f64);

impl Confidence {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(Error::ConfidenceOutOfRange {
                value,
                at: String::new(),
            });
        }
        Ok(Self(value))
    }

    pub fn get(&self) -> f64 {
        self.0
    }

    pub fn total_cmp(&self, other: &Confidence) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The four scored distress categories: longitudinal cracks, lateral cracks,
/// alligator cracking and potholes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistressClass {
    D00,
    D10,
    D20,
    D40,
}

impl DistressClass {
    pub const ALL: [DistressClass; 4] = [
        DistressClass::D00,
        DistressClass::D10,
        DistressClass::D20,
        DistressClass::D40,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DistressClass::D00 => "D00",
            DistressClass::D10 => "D10",
            DistressClass::D20 => "D20",
            DistressClass::D40 => "D40",
        }
    }

    /// Position in [`DistressClass::ALL`]; handy for count arrays.
    pub fn index(&self) -> usize {
        match self {
            DistressClass::D00 => 0,
            DistressClass::D10 => 1,
            DistressClass::D20 => 2,
            DistressClass::D40 => 3,
        }
    }

    /// One-based index used by the submission line format.
    pub fn submission_index(&self) -> u32 {
        self.index() as u32 + 1
    }

    pub fn from_submission_index(idx: u32) -> Option<Self> {
        match idx {
            1 => Some(DistressClass::D00),
            2 => Some(DistressClass::D10),
            3 => Some(DistressClass::D20),
            4 => Some(DistressClass::D40),
            _ => None,
        }
    }
}

impl FromStr for DistressClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D00" => Ok(DistressClass::D00),
            "D10" => Ok(DistressClass::D10),
            "D20" => Ok(DistressClass::D20),
            "D40" => Ok(DistressClass::D40),
            other => Err(Error::UnknownClass {
                code: other.to_string(),
                at: String::new(),
            }),
        }
    }
}

impl fmt::Display for DistressClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Survey countries covered by the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Country {
    Japan,
    India,
    Czech,
}

impl Country {
    pub const ALL: [Country; 3] = [Country::Japan, Country::India, Country::Czech];

    pub fn as_str(&self) -> &'static str {
        match self {
            Country::Japan => "Japan",
            Country::India => "India",
            Country::Czech => "Czech",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Japan" => Some(Country::Japan),
            "India" => Some(Country::India),
            "Czech" => Some(Country::Czech),
            _ => None,
        }
    }

    /// Country from GRDC-style ids such as `Japan_013778.jpg`.
    pub fn infer_from_image_id(image_id: &str) -> Option<Self> {
        let prefix = image_id.split('_').next()?;
        Self::parse(prefix)
    }

    pub fn index(&self) -> usize {
        match self {
            Country::Japan => 0,
            Country::India => 1,
            Country::Czech => 2,
        }
    }
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-image facts needed to interpret detections: pixel dimensions plus the
/// optional country tag and GPS fix.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageMeta {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub country: Option<Country>,
    pub gps: Option<GeoPoint>,
}

impl ImageMeta {
    pub fn new(image_id: impl Into<String>, width: u32, height: u32) -> Result<Self> {
        let image_id = image_id.into();
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image `{image_id}` declares empty dimensions {width}x{height}"
            )));
        }
        Ok(Self {
            image_id,
            width,
            height,
            country: None,
            gps: None,
        })
    }

    pub fn with_country(mut self, country: impl Into<Option<Country>>) -> Self {
        self.country = country.into();
        self
    }

    pub fn with_gps(mut self, gps: impl Into<Option<GeoPoint>>) -> Self {
        self.gps = gps.into();
        self
    }
}

/// One raw model output: a box in the coordinate frame of the view the model
/// saw, plus provenance describing which model and view produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image_id: String,
    pub model_id: String,
    pub view: View,
    pub class: DistressClass,
    pub confidence: Confidence,
    pub bbox: BoundingBox,
}

impl Detection {
    pub fn new(
        image_id: impl Into<String>,
        model_id: impl Into<String>,
        view: View,
        class: DistressClass,
        confidence: f64,
        bbox: BoundingBox,
    ) -> Result<Self> {
        Ok(Self {
            image_id: image_id.into(),
            model_id: model_id.into(),
            view,
            class,
            confidence: Confidence::new(confidence)?,
            bbox,
        })
    }
}
