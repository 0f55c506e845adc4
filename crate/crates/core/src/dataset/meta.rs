//! Image metadata CSV: one row per image with dimensions, origin country
//! and optional GPS position.
//!
//! ```text
//! image_id,width,height,country,lat,lon
//! ```
//!
//! The header row is required. `country`, `lat` and `lon` may be empty;
//! latitude and longitude must be given together or not at all.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::detection::{Country, ImageMeta};
use crate::error::{Error, Result};
use crate::geo::GeoPoint;

const HEADER: &str = "image_id,width,height,country,lat,lon";

/// Loads an image-metadata CSV keyed by image id.
pub fn load_image_meta(path: &Path) -> Result<BTreeMap<String, ImageMeta>> {
    let file = path.display().to_string();
    let content = fs::read_to_string(path)?;
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == HEADER => {}
        other => {
            return Err(Error::Parse {
                file,
                context: "line 1".to_string(),
                msg: format!(
                    "expected header `{HEADER}`, found `{}`",
                    other.map(|(_, l)| l.trim()).unwrap_or_default()
                ),
            });
        }
    }
    let mut metas = BTreeMap::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let context = format!("line {}", idx + 1);
        let parse_err = |msg: String| Error::Parse {
            file: file.clone(),
            context: context.clone(),
            msg,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(parse_err(format!(
                "expected 6 fields, found {}",
                fields.len()
            )));
        }
        let width: u32 = fields[1]
            .parse()
            .map_err(|_| parse_err(format!("bad width `{}`", fields[1])))?;
        let height: u32 = fields[2]
            .parse()
            .map_err(|_| parse_err(format!("bad height `{}`", fields[2])))?;
        let mut meta = ImageMeta::new(fields[0], width, height)?;
        if !fields[3].is_empty() {
            let country = Country::parse(fields[3])
                .ok_or_else(|| parse_err(format!("unknown country `{}`", fields[3])))?;
            meta = meta.with_country(Some(country));
        }
        match (fields[4].is_empty(), fields[5].is_empty()) {
            (true, true) => {}
            (false, false) => {
                let lat: f64 = fields[4]
                    .parse()
                    .map_err(|_| parse_err(format!("bad lat `{}`", fields[4])))?;
                let lon: f64 = fields[5]
                    .parse()
                    .map_err(|_| parse_err(format!("bad lon `{}`", fields[5])))?;
                meta = meta.with_gps(Some(GeoPoint::new(lat, lon)?));
            }
            _ => {
                return Err(parse_err("lat and lon must be given together".to_string()));
            }
        }
        if metas.insert(meta.image_id.clone(), meta).is_some() {
            return Err(parse_err("duplicate image_id".to_string()));
        }
    }
    Ok(metas)
}

/// Writes image metadata in id order. Coordinates use six decimals;
/// absent country/GPS fields are left empty.
pub fn write_image_meta<W: Write>(mut w: W, metas: &BTreeMap<String, ImageMeta>) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    for meta in metas.values() {
        let country = meta.country.map(|c| c.as_str()).unwrap_or("");
        let (lat, lon) = match meta.gps {
            Some(p) => (format!("{:.6}", p.lat), format!("{:.6}", p.lon)),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{country},{lat},{lon}",
            meta.image_id, meta.width, meta.height
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(content: &str) -> Result<BTreeMap<String, ImageMeta>> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("meta.csv");
        fs::write(&path, content).unwrap();
        load_image_meta(&path)
    }

    #[test]
    fn loads_rows_with_and_without_gps() {
        let metas = load_str(
            "image_id,width,height,country,lat,lon\n\
             Japan_000001.jpg,600,600,Japan,35.689500,139.691700\n\
             India_000007.jpg,720,720,India,,\n",
        )
        .unwrap();
        assert_eq!(metas.len(), 2);
        let jp = &metas["Japan_000001.jpg"];
        assert_eq!((jp.width, jp.height), (600, 600));
        assert_eq!(jp.country, Some(Country::Japan));
        let gps = jp.gps.unwrap();
        assert!((gps.lat - 35.6895).abs() < 1e-9);
        assert!(metas["India_000007.jpg"].gps.is_none());
    }

    #[test]
    fn header_is_required() {
        let err = load_str("Japan_000001.jpg,600,600,Japan,,\n").unwrap_err();
        assert!(err.to_string().contains("header"));
    }

    #[test]
    fn lone_latitude_is_rejected() {
        let err = load_str(
            "image_id,width,height,country,lat,lon\n\
             a.jpg,600,600,Japan,35.0,\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("together"));
    }

    #[test]
    fn out_of_range_coordinates_are_rejected() {
        let err = load_str(
            "image_id,width,height,country,lat,lon\n\
             a.jpg,600,600,Japan,95.0,10.0\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidCoordinate { lat, .. } if lat == 95.0));
    }

    #[test]
    fn duplicate_image_id_is_rejected() {
        let err = load_str(
            "image_id,width,height,country,lat,lon\n\
             a.jpg,600,600,Japan,,\n\
             a.jpg,600,600,Japan,,\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn empty_country_stays_unset() {
        let metas = load_str(
            "image_id,width,height,country,lat,lon\n\
             mystery.jpg,640,480,,,\n",
        )
        .unwrap();
        assert_eq!(metas["mystery.jpg"].country, None);
    }

    #[test]
    fn write_load_round_trips() {
        let mut metas = BTreeMap::new();
        let a = ImageMeta::new("a.jpg", 600, 600)
            .unwrap()
            .with_country(Country::Czech)
            .with_gps(GeoPoint::new(50.0755, 14.4378).unwrap());
        let b = ImageMeta::new("b.jpg", 720, 480).unwrap();
        metas.insert(a.image_id.clone(), a);
        metas.insert(b.image_id.clone(), b);

        let mut buf = Vec::new();
        write_image_meta(&mut buf, &metas).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("meta.csv");
        fs::write(&path, &buf).unwrap();
        let reloaded = load_image_meta(&path).unwrap();
        assert_eq!(metas, reloaded);
    }
}
