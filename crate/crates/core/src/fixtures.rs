//! Deterministic test fixtures: hand-assembled JPEG/EXIF byte streams and
//! seeded synthetic detection scenes.
//!
//! Compiled for this crate's own tests and, behind the `test-fixtures`
//! feature, for downstream test and bench targets. Nothing here belongs in
//! production paths.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::detection::{BoundingBox, Country, Detection, DistressClass, ImageMeta};
use crate::geo::GeoPoint;
use crate::tta::{forward_box, ViewManifest};

const ASCII: u16 = 2;
const SHORT: u16 = 3;
const LONG: u16 = 4;
const RATIONAL: u16 = 5;

fn push_u16(buf: &mut Vec<u8>, v: u16) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_entry(buf: &mut Vec<u8>, tag: u16, kind: u16, count: u32, value: [u8; 4]) {
    push_u16(buf, tag);
    push_u16(buf, kind);
    push_u32(buf, count);
    buf.extend_from_slice(&value);
}

fn push_rationals(buf: &mut Vec<u8>, triple: [(u32, u32); 3]) {
    for (num, den) in triple {
        push_u32(buf, num);
        push_u32(buf, den);
    }
}

fn tiff_header(buf: &mut Vec<u8>) {
    buf.extend_from_slice(b"II");
    push_u16(buf, 42);
    push_u32(buf, 8); // IFD0 directly after the header
}

/// IFD0 holding only the GPS sub-IFD pointer; the sub-IFD starts right
/// after IFD0's terminator, at offset 26.
fn ifd0_with_gps_pointer(buf: &mut Vec<u8>) {
    push_u16(buf, 1);
    push_entry(buf, 0x8825, LONG, 1, 26u32.to_le_bytes());
    push_u32(buf, 0);
}

/// Wraps a TIFF body in the JPEG APP1 framing readers expect.
fn wrap_jpeg(tiff: &[u8]) -> Vec<u8> {
    let mut jpeg = vec![0xFF, 0xD8, 0xFF, 0xE1];
    let len = (2 + 6 + tiff.len()) as u16;
    jpeg.extend_from_slice(&len.to_be_bytes());
    jpeg.extend_from_slice(b"Exif\0\0");
    jpeg.extend_from_slice(tiff);
    jpeg.extend_from_slice(&[0xFF, 0xD9]);
    jpeg
}

/// A JPEG whose EXIF block carries a complete GPS fix. Each coordinate is a
/// degree/minute/second triple of `(numerator, denominator)` rationals; the
/// refs are ASCII bytes such as `b'N'` / `b'W'`. Passing a zero denominator
/// produces a structurally valid file with unusable GPS data.
pub fn jpeg_with_gps(
    lat_dms: [(u32, u32); 3],
    lat_ref: u8,
    lon_dms: [(u32, u32); 3],
    lon_ref: u8,
) -> Vec<u8> {
    let mut tiff = Vec::with_capacity(128);
    tiff_header(&mut tiff);
    ifd0_with_gps_pointer(&mut tiff);

    // GPS IFD at offset 26: four entries, rational payloads at 80 and 104.
    push_u16(&mut tiff, 4);
    push_entry(&mut tiff, 0x0001, ASCII, 2, [lat_ref, 0, 0, 0]);
    push_entry(&mut tiff, 0x0002, RATIONAL, 3, 80u32.to_le_bytes());
    push_entry(&mut tiff, 0x0003, ASCII, 2, [lon_ref, 0, 0, 0]);
    push_entry(&mut tiff, 0x0004, RATIONAL, 3, 104u32.to_le_bytes());
    push_u32(&mut tiff, 0);
    push_rationals(&mut tiff, lat_dms);
    push_rationals(&mut tiff, lon_dms);
    debug_assert_eq!(tiff.len(), 128);

    wrap_jpeg(&tiff)
}

/// A JPEG with a GPS IFD that names a latitude but no longitude — present
/// but unusable.
pub fn jpeg_with_partial_gps() -> Vec<u8> {
    let mut tiff = Vec::with_capacity(80);
    tiff_header(&mut tiff);
    ifd0_with_gps_pointer(&mut tiff);

    push_u16(&mut tiff, 2);
    push_entry(&mut tiff, 0x0001, ASCII, 2, [b'N', 0, 0, 0]);
    push_entry(&mut tiff, 0x0002, RATIONAL, 3, 56u32.to_le_bytes());
    push_u32(&mut tiff, 0);
    push_rationals(&mut tiff, [(40, 1), (42, 1), (4608, 100)]);
    debug_assert_eq!(tiff.len(), 80);

    wrap_jpeg(&tiff)
}

/// A JPEG with EXIF metadata (an orientation tag) but no GPS at all.
pub fn jpeg_without_gps() -> Vec<u8> {
    let mut tiff = Vec::with_capacity(26);
    tiff_header(&mut tiff);
    push_u16(&mut tiff, 1);
    push_entry(&mut tiff, 0x0112, SHORT, 1, [1, 0, 0, 0]);
    push_u32(&mut tiff, 0);
    wrap_jpeg(&tiff)
}

/// A JPEG with no EXIF segment whatsoever (JFIF header only).
pub fn jpeg_no_exif() -> Vec<u8> {
    vec![
        0xFF, 0xD8, // SOI
        0xFF, 0xE0, 0x00, 0x10, // APP0, length 16
        b'J', b'F', b'I', b'F', 0x00, 0x01, 0x01, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00, 0xFF,
        0xD9, // EOI
    ]
}

/// A random well-formed box inside a `width` × `height` frame.
pub fn random_box<R: Rng>(rng: &mut R, width: u32, height: u32) -> BoundingBox {
    assert!(width >= 2 && height >= 2, "frame too small for a box");
    let x_min = rng.random_range(0.0..width as f64 - 1.0);
    let y_min = rng.random_range(0.0..height as f64 - 1.0);
    let x_max = rng.random_range(x_min + 1.0..=width as f64);
    let y_max = rng.random_range(y_min + 1.0..=height as f64);
    BoundingBox::new(x_min, y_min, x_max, y_max).expect("sampled corners are ordered")
}

/// A seeded multi-model, multi-view detection workload plus the metadata
/// needed to fuse it.
pub struct SyntheticScene {
    pub detections: BTreeMap<String, Vec<Detection>>,
    pub metas: BTreeMap<String, ImageMeta>,
    pub manifest: ViewManifest,
}

/// Generates `images` frames, each carrying `models × 5 views ×
/// dets_per_model_view` detections projected into their view's coordinate
/// space. Frames alternate 600² and 720²; most carry a GPS fix near a
/// common center (every seventh frame goes without, to exercise unmapped
/// accounting). Identical seeds reproduce the scene bit-for-bit.
pub fn synthetic_scene(
    images: usize,
    models: usize,
    dets_per_model_view: usize,
    seed: u64,
) -> SyntheticScene {
    let manifest = ViewManifest::canonical();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut detections = BTreeMap::new();
    let mut metas = BTreeMap::new();

    for i in 0..images {
        let image_id = format!("Japan_{i:06}.jpg");
        let side = if i % 2 == 0 { 600 } else { 720 };
        let mut meta = ImageMeta::new(&image_id, side, side)
            .unwrap()
            .with_country(Country::Japan);
        if i % 7 != 3 {
            let lat = 35.0 + rng.random_range(0.0..0.01);
            let lon = 139.0 + rng.random_range(0.0..0.01);
            meta = meta.with_gps(GeoPoint::new(lat, lon).unwrap());
        }

        let mut dets = Vec::new();
        for m in 0..models {
            let model_id = format!("model_{m}");
            for &view in manifest.views() {
                for _ in 0..dets_per_model_view {
                    let base = random_box(&mut rng, side, side);
                    let projected = forward_box(&base, view, &meta);
                    let class = DistressClass::ALL[rng.random_range(0..4)];
                    let conf = rng.random_range(0.05..0.99);
                    dets.push(
                        Detection::new(&image_id, &model_id, view, class, conf, projected)
                            .expect("synthetic detection is valid"),
                    );
                }
            }
        }
        detections.insert(image_id.clone(), dets);
        metas.insert(image_id, meta);
    }

    SyntheticScene {
        detections,
        metas,
        manifest,
    }
}
