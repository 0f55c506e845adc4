//! Ground-truth ingestion from per-image annotation XML or a flat CSV.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::detection::{clamp_corners, BoundingBox, Country, DistressClass, ImageMeta};
use crate::error::{at, Error, Result};

/// One annotated box.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub class: DistressClass,
    pub bbox: BoundingBox,
}

/// Everything known about one annotated image. Boxes are already clamped to
/// the image bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRecord {
    pub meta: ImageMeta,
    pub annotations: Vec<Annotation>,
}

impl GroundTruthRecord {
    pub fn image_id(&self) -> &str {
        &self.meta.image_id
    }
}

/// Ingestion outcome. In lenient mode annotations with out-of-scope class
/// codes are skipped and counted here rather than failing the load.
#[derive(Debug)]
pub struct LoadedGroundTruth {
    /// Sorted by image id.
    pub records: Vec<GroundTruthRecord>,
    pub skipped_annotations: usize,
}

/// Loads annotations from `path`: a directory of per-image `.xml` files, a
/// single `.xml` file, or a flat `.csv`.
///
/// `strict` controls what happens to class codes outside the four scored
/// categories: error out, or skip and count. Malformed geometry is an error
/// in both modes.
pub fn load_ground_truth(path: &Path, strict: bool) -> Result<LoadedGroundTruth> {
    let mut records = Vec::new();
    let mut skipped = 0usize;

    if path.is_dir() {
        let mut xml_files: Vec<_> = fs::read_dir(path)?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("xml"))
            .collect();
        xml_files.sort();
        for file in xml_files {
            records.push(parse_xml_file(&file, strict, &mut skipped)?);
        }
    } else {
        match path.extension().and_then(|e| e.to_str()) {
            Some("xml") => records.push(parse_xml_file(path, strict, &mut skipped)?),
            Some("csv") => records = parse_csv_file(path, strict, &mut skipped)?,
            _ => {
                return Err(Error::Parse {
                    file: path.display().to_string(),
                    context: "path".into(),
                    msg: "expected a directory of .xml files, an .xml file or a .csv file".into(),
                })
            }
        }
    }

    records.sort_by(|a, b| a.meta.image_id.cmp(&b.meta.image_id));
    for pair in records.windows(2) {
        if pair[0].meta.image_id == pair[1].meta.image_id {
            return Err(Error::Parse {
                file: path.display().to_string(),
                context: format!("image {}", pair[0].meta.image_id),
                msg: "duplicate annotation record".into(),
            });
        }
    }
    Ok(LoadedGroundTruth {
        records,
        skipped_annotations: skipped,
    })
}

#[derive(Deserialize)]
struct XmlAnnotation {
    #[serde(default)]
    folder: Option<String>,
    filename: String,
    size: XmlSize,
    #[serde(default, rename = "object")]
    objects: Vec<XmlObject>,
}

#[derive(Deserialize)]
struct XmlSize {
    width: u32,
    height: u32,
}

#[derive(Deserialize)]
struct XmlObject {
    name: String,
    bndbox: XmlBox,
}

#[derive(Deserialize)]
struct XmlBox {
    xmin: f64,
    ymin: f64,
    xmax: f64,
    ymax: f64,
}

fn parse_xml_file(path: &Path, strict: bool, skipped: &mut usize) -> Result<GroundTruthRecord> {
    let file = path.display().to_string();
    let content = fs::read_to_string(path)?;
    let parsed: XmlAnnotation = quick_xml::de::from_str(&content).map_err(|e| Error::Parse {
        file: file.clone(),
        context: "annotation".into(),
        msg: e.to_string(),
    })?;

    let country = parsed
        .folder
        .as_deref()
        .and_then(Country::parse)
        .or_else(|| Country::infer_from_image_id(&parsed.filename));
    let meta = ImageMeta::new(
        parsed.filename.clone(),
        parsed.size.width,
        parsed.size.height,
    )
    .map_err(|e| Error::Parse {
        file: file.clone(),
        context: format!("image {}", parsed.filename),
        msg: e.to_string(),
    })?
    .with_country(country);

    let mut annotations = Vec::new();
    for (i, obj) in parsed.objects.iter().enumerate() {
        let context = format!("image {}, object {}", parsed.filename, i + 1);
        let class = match obj.name.parse::<DistressClass>() {
            Ok(class) => class,
            Err(_) if !strict => {
                *skipped += 1;
                continue;
            }
            Err(_) => {
                return Err(Error::UnknownClass {
                    code: obj.name.clone(),
                    at: at(&file, &context),
                })
            }
        };
        let bbox = clamp_corners(
            obj.bndbox.xmin,
            obj.bndbox.ymin,
            obj.bndbox.xmax,
            obj.bndbox.ymax,
            &meta,
        )
        .map_err(|e| Error::Parse {
            file: file.clone(),
            context,
            msg: e.to_string(),
        })?;
        annotations.push(Annotation { class, bbox });
    }
    Ok(GroundTruthRecord { meta, annotations })
}

pub(crate) const CSV_HEADER: &str = "image_id,width,height,class,x_min,y_min,x_max,y_max";

fn parse_csv_file(
    path: &Path,
    strict: bool,
    skipped: &mut usize,
) -> Result<Vec<GroundTruthRecord>> {
    let file = path.display().to_string();
    let content = fs::read_to_string(path)?;
    let mut by_image: BTreeMap<String, GroundTruthRecord> = BTreeMap::new();

    for (idx, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (idx == 0 && line == CSV_HEADER) {
            continue;
        }
        let context = format!("line {}", idx + 1);
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                file,
                context,
                msg: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let image_id = fields[0].to_string();
        let width: u32 = parse_field(fields[1], "width", &file, &context)?;
        let height: u32 = parse_field(fields[2], "height", &file, &context)?;

        let record = match by_image.get_mut(&image_id) {
            Some(existing) => {
                if existing.meta.width != width || existing.meta.height != height {
                    return Err(Error::Parse {
                        file,
                        context,
                        msg: format!(
                            "image {image_id} re-declared as {width}x{height}, earlier rows said {}x{}",
                            existing.meta.width, existing.meta.height
                        ),
                    });
                }
                existing
            }
            None => {
                let meta = ImageMeta::new(image_id.clone(), width, height)
                    .map_err(|e| Error::Parse {
                        file: file.clone(),
                        context: context.clone(),
                        msg: e.to_string(),
                    })?
                    .with_country(Country::infer_from_image_id(&image_id));
                by_image
                    .entry(image_id.clone())
                    .or_insert(GroundTruthRecord {
                        meta,
                        annotations: Vec::new(),
                    })
            }
        };

        // A row with empty class and coordinates declares an image with no
        // annotations; partially empty rows are malformed.
        let tail = &fields[3..8];
        if tail.iter().all(|f| f.is_empty()) {
            continue;
        }
        if tail.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                file,
                context,
                msg: "class and coordinates must be all present or all empty".into(),
            });
        }
        let class = match fields[3].parse::<DistressClass>() {
            Ok(class) => class,
            Err(_) if !strict => {
                *skipped += 1;
                continue;
            }
            Err(_) => {
                return Err(Error::UnknownClass {
                    code: fields[3].to_string(),
                    at: at(&file, &context),
                })
            }
        };
        let x_min: f64 = parse_field(fields[4], "x_min", &file, &context)?;
        let y_min: f64 = parse_field(fields[5], "y_min", &file, &context)?;
        let x_max: f64 = parse_field(fields[6], "x_max", &file, &context)?;
        let y_max: f64 = parse_field(fields[7], "y_max", &file, &context)?;
        let bbox =
            clamp_corners(x_min, y_min, x_max, y_max, &record.meta).map_err(|e| Error::Parse {
                file: file.clone(),
                context,
                msg: e.to_string(),
            })?;
        record.annotations.push(Annotation { class, bbox });
    }
    Ok(by_image.into_values().collect())
}

fn parse_field<T: std::str::FromStr>(
    raw: &str,
    name: &str,
    file: &str,
    context: &str,
) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        file: file.to_string(),
        context: context.to_string(),
        msg: format!("bad {name} value `{raw}`"),
    })
}
