//! Test-time augmentation views and the coordinate maps that undo them.
//!
//! Detectors run on five renderings of every frame: the frame itself, its
//! horizontal mirror, and three rescales (1.30x, 0.83x, 0.67x). Boxes come
//! back in view coordinates; [`deaugment`] maps them into the base frame so
//! the ensemble can pool them. Vertical flipping is a training-only
//! augmentation and deliberately has no view here.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::detection::{clamp_corners, BoundingBox, Detection, ImageMeta};
use crate::error::{at, Error, Result};

/// One of the five canonical inference-time views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum View {
    Identity,
    HFlip,
    Scale130,
    Scale083,
    Scale067,
}

impl View {
    pub const ALL: [View; 5] = [
        View::Identity,
        View::HFlip,
        View::Scale130,
        View::Scale083,
        View::Scale067,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            View::Identity => "identity",
            View::HFlip => "hflip",
            View::Scale130 => "scale_130",
            View::Scale083 => "scale_083",
            View::Scale067 => "scale_067",
        }
    }

    /// Resize factor applied to the base frame when rendering this view.
    pub fn scale(&self) -> f64 {
        match self {
            View::Identity | View::HFlip => 1.0,
            View::Scale130 => 1.30,
            View::Scale083 => 0.83,
            View::Scale067 => 0.67,
        }
    }

    pub fn flipped(&self) -> bool {
        matches!(self, View::HFlip)
    }

    /// Pixel dimensions of this view's rendering, rounding half away from
    /// zero exactly as the image resizer does.
    pub fn scaled_dims(&self, meta: &ImageMeta) -> (u32, u32) {
        let s = self.scale();
        (
            (f64::from(meta.width) * s).round() as u32,
            (f64::from(meta.height) * s).round() as u32,
        )
    }

    pub fn index(&self) -> usize {
        match self {
            View::Identity => 0,
            View::HFlip => 1,
            View::Scale130 => 2,
            View::Scale083 => 3,
            View::Scale067 => 4,
        }
    }
}

impl FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(View::Identity),
            "hflip" => Ok(View::HFlip),
            "scale_130" => Ok(View::Scale130),
            "scale_083" => Ok(View::Scale083),
            "scale_067" => Ok(View::Scale067),
            other => Err(Error::UnknownView {
                view_id: other.to_string(),
                at: String::new(),
            }),
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The views a run actually used. Always contains `identity`, never a
/// duplicate; detections referencing views outside the manifest are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewManifest {
    views: Vec<View>,
}

impl ViewManifest {
    pub fn new(views: Vec<View>) -> Result<Self> {
        let mut seen = [false; 5];
        for v in &views {
            if seen[v.index()] {
                return Err(Error::InvalidArgument(format!(
                    "view `{v}` declared twice in the manifest"
                )));
            }
            seen[v.index()] = true;
        }
        if !seen[View::Identity.index()] {
            return Err(Error::InvalidArgument(
                "manifest must declare the identity view".into(),
            ));
        }
        Ok(Self { views })
    }

    /// All five canonical views in canonical order.
    pub fn canonical() -> Self {
        Self {
            views: View::ALL.to_vec(),
        }
    }

    /// Identity-only manifest, the degenerate single-view setup.
    pub fn identity_only() -> Self {
        Self {
            views: vec![View::Identity],
        }
    }

    pub fn views(&self) -> &[View] {
        &self.views
    }

    pub fn contains(&self, view: View) -> bool {
        self.views.contains(&view)
    }

    pub fn require(&self, view: View, context: &str) -> Result<View> {
        if self.contains(view) {
            Ok(view)
        } else {
            Err(Error::UnknownView {
                view_id: view.as_str().to_string(),
                at: if context.is_empty() {
                    String::new()
                } else {
                    format!(" ({context})")
                },
            })
        }
    }

    /// Reads a manifest file: a `view_id,scale,flipped` header followed by
    /// one row per view. Declared scale and flip must match the canonical
    /// definition of the named view.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = path.display().to_string();
        let content = fs::read_to_string(path)?;
        let mut lines = content.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "view_id,scale,flipped" => {}
            Some((_, header)) => {
                return Err(Error::Parse {
                    file,
                    context: "line 1".into(),
                    msg: format!("expected header `view_id,scale,flipped`, found `{header}`"),
                })
            }
            None => {
                return Err(Error::Parse {
                    file,
                    context: "line 1".into(),
                    msg: "empty manifest".into(),
                })
            }
        }
        let mut views = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let context = format!("line {}", idx + 1);
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    file,
                    context,
                    msg: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let view = fields[0].parse::<View>().map_err(|_| Error::UnknownView {
                view_id: fields[0].to_string(),
                at: at(&file, &context),
            })?;
            let scale: f64 = fields[1].parse().map_err(|_| Error::Parse {
                file: file.clone(),
                context: context.clone(),
                msg: format!("bad scale `{}`", fields[1]),
            })?;
            let flipped: bool = fields[2].parse().map_err(|_| Error::Parse {
                file: file.clone(),
                context: context.clone(),
                msg: format!("bad flipped flag `{}`", fields[2]),
            })?;
            if (scale - view.scale()).abs() > 1e-9 || flipped != view.flipped() {
                return Err(Error::Parse {
                    file,
                    context,
                    msg: format!(
                        "view `{view}` declares scale={scale} flipped={flipped}, expected scale={} flipped={}",
                        view.scale(),
                        view.flipped()
                    ),
                });
            }
            views.push(view);
        }
        Self::new(views)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "view_id,scale,flipped")?;
        for v in &self.views {
            writeln!(w, "{},{},{}", v, v.scale(), v.flipped())?;
        }
        Ok(())
    }
}

/// Maps a base-frame box into view coordinates: mirror first (around the
/// base width) for flipped views, then scale. Expects the box to sit inside
/// the base frame.
pub fn forward_box(b: &BoundingBox, view: View, meta: &ImageMeta) -> BoundingBox {
    let (mut x0, y0, mut x1, y1) = b.corners();
    if view.flipped() {
        let w = f64::from(meta.width);
        (x0, x1) = (w - x1, w - x0);
    }
    let s = view.scale();
    BoundingBox::new(x0 * s, y0 * s, x1 * s, y1 * s)
        .expect("forward mapping of an in-frame box stays valid")
}

/// Inverse of [`forward_box`]: divides by the declared scale factor (never a
/// rounded-dimension ratio), un-mirrors, then clips to the base frame.
/// Provenance fields are preserved untouched.
pub fn deaugment(d: &Detection, view: View, meta: &ImageMeta) -> Result<Detection> {
    let s = view.scale();
    let (mut x0, mut y0, mut x1, mut y1) = d.bbox.corners();
    x0 /= s;
    y0 /= s;
    x1 /= s;
    y1 /= s;
    if view.flipped() {
        let w = f64::from(meta.width);
        (x0, x1) = (w - x1, w - x0);
    }
    let bbox = clamp_corners(x0, y0, x1, y1, meta)?;
    Ok(Detection { bbox, ..d.clone() })
}
