//! Map export: GeoJSON, flat CSV and a self-contained HTML viewer.

use std::io::Write;

use serde_json::{json, Value};

use crate::error::Result;
use crate::geo::segments::cell_bounds;
use crate::geo::RoadSegmentScore;

/// Damage-score cut points for the traffic-light buckets: scores at or
/// below `yellow` are green, above `red` are red, yellow in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorThresholds {
    pub yellow: f64,
    pub red: f64,
}

impl Default for ColorThresholds {
    fn default() -> Self {
        Self {
            yellow: 0.25,
            red: 0.75,
        }
    }
}

impl ColorThresholds {
    pub fn bucket(&self, damage_score: f64) -> &'static str {
        if damage_score > self.red {
            "red"
        } else if damage_score > self.yellow {
            "yellow"
        } else {
            "green"
        }
    }
}

/// Numbers in exported properties are rounded to six decimals so the CSV
/// and GeoJSON views of a segment carry identical values.
fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn feature(segment: &RoadSegmentScore, cell_size_deg: f64, colors: &ColorThresholds) -> Value {
    let (lat0, lon0, lat1, lon1) = cell_bounds(segment, cell_size_deg);
    // Exterior ring counterclockwise, closed.
    let ring = vec![
        vec![lon0, lat0],
        vec![lon1, lat0],
        vec![lon1, lat1],
        vec![lon0, lat1],
        vec![lon0, lat0],
    ];
    json!({
        "type": "Feature",
        "geometry": {
            "type": "Polygon",
            "coordinates": [ring],
        },
        "properties": {
            "segment_id": segment.segment_id,
            "lat": round6(segment.centroid.lat),
            "lon": round6(segment.centroid.lon),
            "n_images": segment.n_images(),
            "d00": segment.class_counts[0],
            "d10": segment.class_counts[1],
            "d20": segment.class_counts[2],
            "d40": segment.class_counts[3],
            "severity_sum": round6(segment.severity_sum),
            "damage_score": round6(segment.damage_score),
            "color": colors.bucket(segment.damage_score),
        },
    })
}

pub fn geojson_document(
    segments: &[RoadSegmentScore],
    cell_size_deg: f64,
    colors: &ColorThresholds,
) -> Value {
    json!({
        "type": "FeatureCollection",
        "features": segments
            .iter()
            .map(|s| feature(s, cell_size_deg, colors))
            .collect::<Vec<_>>(),
    })
}

/// Writes one polygon feature per segment as a standards-valid
/// FeatureCollection (coordinates in longitude, latitude order).
pub fn export_geojson<W: Write>(
    mut w: W,
    segments: &[RoadSegmentScore],
    cell_size_deg: f64,
    colors: &ColorThresholds,
) -> Result<()> {
    let doc = geojson_document(segments, cell_size_deg, colors);
    serde_json::to_writer_pretty(&mut w, &doc).map_err(std::io::Error::other)?;
    writeln!(w)?;
    Ok(())
}

/// Flat per-segment table with six-decimal coordinates. An empty segment
/// list still writes the header row.
///
/// Floats pass through [`round6`] before formatting so a value here and the
/// same value in the GeoJSON export render identically even when it sits on
/// a rounding boundary.
pub fn export_table<W: Write>(mut w: W, segments: &[RoadSegmentScore]) -> Result<()> {
    writeln!(
        w,
        "segment_id,lat,lon,n_images,d00,d10,d20,d40,severity_sum,damage_score"
    )?;
    for s in segments {
        writeln!(
            w,
            "{},{:.6},{:.6},{},{},{},{},{},{:.6},{:.6}",
            s.segment_id,
            round6(s.centroid.lat),
            round6(s.centroid.lon),
            s.n_images(),
            s.class_counts[0],
            s.class_counts[1],
            s.class_counts[2],
            s.class_counts[3],
            round6(s.severity_sum),
            round6(s.damage_score),
        )?;
    }
    Ok(())
}

const HTML_TEMPLATE: &str = r##"<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>Road damage map</title>
<style>
  body { font-family: sans-serif; margin: 1.5em; background: #fafafa; }
  #map { border: 1px solid #ccc; background: #fff; }
  .legend span { display: inline-block; width: 0.9em; height: 0.9em; margin: 0 0.3em 0 1em; }
  .green { background: #2e7d32; } .yellow { background: #f9a825; } .red { background: #c62828; }
  #info { color: #444; min-height: 1.4em; }
</style>
</head>
<body>
<h2>Road damage map</h2>
<p class="legend">damage score:
  <span class="green"></span>low <span class="yellow"></span>medium <span class="red"></span>high
</p>
<svg id="map" width="860" height="640"></svg>
<p id="info">hover a segment</p>
<script>
const COLLECTION = __GEOJSON__;
const FILL = { green: "#2e7d32", yellow: "#f9a825", red: "#c62828" };
const svg = document.getElementById("map");
const info = document.getElementById("info");
const feats = COLLECTION.features;
if (feats.length === 0) {
  info.textContent = "no segments to draw";
} else {
  let minLon = Infinity, minLat = Infinity, maxLon = -Infinity, maxLat = -Infinity;
  for (const f of feats) {
    for (const [lon, lat] of f.geometry.coordinates[0]) {
      minLon = Math.min(minLon, lon); maxLon = Math.max(maxLon, lon);
      minLat = Math.min(minLat, lat); maxLat = Math.max(maxLat, lat);
    }
  }
  const pad = 0.05 * Math.max(maxLon - minLon, maxLat - minLat, 1e-9);
  minLon -= pad; maxLon += pad; minLat -= pad; maxLat += pad;
  const W = svg.width.baseVal.value, H = svg.height.baseVal.value;
  const sx = W / (maxLon - minLon), sy = H / (maxLat - minLat);
  const px = lon => (lon - minLon) * sx;
  const py = lat => H - (lat - minLat) * sy;
  for (const f of feats) {
    const ring = f.geometry.coordinates[0];
    const points = ring.map(([lon, lat]) => px(lon) + "," + py(lat)).join(" ");
    const poly = document.createElementNS("http://www.w3.org/2000/svg", "polygon");
    poly.setAttribute("points", points);
    poly.setAttribute("fill", FILL[f.properties.color] || "#888");
    poly.setAttribute("fill-opacity", "0.75");
    poly.setAttribute("stroke", "#333");
    poly.setAttribute("stroke-width", "0.5");
    poly.addEventListener("mouseenter", () => {
      const p = f.properties;
      info.textContent = p.segment_id + ": score " + p.damage_score.toFixed(3)
        + " over " + p.n_images + " image(s), counts d00=" + p.d00
        + " d10=" + p.d10 + " d20=" + p.d20 + " d40=" + p.d40;
    });
    svg.appendChild(poly);
  }
}
</script>
</body>
</html>
"##;

/// Self-contained HTML page with the GeoJSON inlined and rendered to SVG;
/// needs no network access to view.
pub fn export_html<W: Write>(
    mut w: W,
    segments: &[RoadSegmentScore],
    cell_size_deg: f64,
    colors: &ColorThresholds,
) -> Result<()> {
    let doc = geojson_document(segments, cell_size_deg, colors);
    let page = HTML_TEMPLATE.replace("__GEOJSON__", &doc.to_string());
    w.write_all(page.as_bytes())?;
    Ok(())
}
