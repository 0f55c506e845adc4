//! GPS extraction from JPEG EXIF metadata.

use std::io::Cursor;

use exif::{In, Tag, Value};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;

/// Pulls the GPS fix out of a JPEG byte stream.
///
/// Returns `Ok(None)` when the file simply carries no GPS tags (or no EXIF
/// segment at all); that is the normal case for untagged survey frames, not
/// an error. `MalformedExif` is reserved for data that is present but
/// unusable: broken containers, partial tag sets, zero denominators, refs
/// other than N/S/E/W, or coordinates outside valid ranges.
pub fn extract_gps(bytes: &[u8]) -> Result<Option<GeoPoint>> {
    let exif = match ::exif::Reader::new().read_from_container(&mut Cursor::new(bytes)) {
        Ok(exif) => exif,
        Err(::exif::Error::NotFound(_)) => return Ok(None),
        Err(e) => return Err(Error::MalformedExif(e.to_string())),
    };

    let lat = exif.get_field(Tag::GPSLatitude, In::PRIMARY);
    let lat_ref = exif.get_field(Tag::GPSLatitudeRef, In::PRIMARY);
    let lon = exif.get_field(Tag::GPSLongitude, In::PRIMARY);
    let lon_ref = exif.get_field(Tag::GPSLongitudeRef, In::PRIMARY);

    match (lat, lat_ref, lon, lon_ref) {
        (None, None, None, None) => Ok(None),
        (Some(lat), Some(lat_ref), Some(lon), Some(lon_ref)) => {
            let lat_deg = dms_to_degrees(&lat.value, "GPSLatitude")?;
            let lon_deg = dms_to_degrees(&lon.value, "GPSLongitude")?;
            let lat_signed = apply_ref(lat_deg, &lat_ref.value, 'N', 'S')?;
            let lon_signed = apply_ref(lon_deg, &lon_ref.value, 'E', 'W')?;
            GeoPoint::new(lat_signed, lon_signed)
                .map(Some)
                .map_err(|e| Error::MalformedExif(e.to_string()))
        }
        _ => Err(Error::MalformedExif(
            "partial GPS tag set: need latitude, longitude and both refs".into(),
        )),
    }
}

/// Degrees + minutes/60 + seconds/3600 from an EXIF rational triple.
fn dms_to_degrees(value: &Value, tag: &str) -> Result<f64> {
    let Value::Rational(rationals) = value else {
        return Err(Error::MalformedExif(format!(
            "{tag}: expected rational values"
        )));
    };
    if rationals.len() != 3 {
        return Err(Error::MalformedExif(format!(
            "{tag}: expected a degree/minute/second triple, found {} values",
            rationals.len()
        )));
    }
    let mut parts = [0.0f64; 3];
    for (i, r) in rationals.iter().enumerate() {
        if r.denom == 0 {
            return Err(Error::MalformedExif(format!(
                "{tag}: zero denominator in component {i}"
            )));
        }
        parts[i] = r.to_f64();
    }
    Ok(parts[0] + parts[1] / 60.0 + parts[2] / 3600.0)
}

/// Applies the hemisphere sign: `positive` keeps the value, `negative`
/// negates it, anything else is malformed.
fn apply_ref(degrees: f64, value: &Value, positive: char, negative: char) -> Result<f64> {
    let Value::Ascii(chunks) = value else {
        return Err(Error::MalformedExif("hemisphere ref is not ASCII".into()));
    };
    let text = chunks
        .first()
        .map(|c| String::from_utf8_lossy(c).trim().to_string())
        .unwrap_or_default();
    if text.len() == 1 && text.starts_with(positive) {
        Ok(degrees)
    } else if text.len() == 1 && text.starts_with(negative) {
        Ok(-degrees)
    } else {
        Err(Error::MalformedExif(format!(
            "hemisphere ref `{text}` (expected {positive} or {negative})"
        )))
    }
}
