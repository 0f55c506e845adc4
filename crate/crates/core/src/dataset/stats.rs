//! Per-country dataset composition counts.

use std::io::Write;

use crate::dataset::ground_truth::GroundTruthRecord;
use crate::detection::{Country, DistressClass};
use crate::error::{Error, Result};

/// Image and annotation counts broken out by country and distress class.
/// Rows are indexed by [`Country::index`], columns by [`DistressClass::index`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetStats {
    pub images: [u64; 3],
    pub boxes: [[u64; 4]; 3],
}

impl DatasetStats {
    pub fn total_images(&self) -> u64 {
        self.images.iter().sum()
    }

    pub fn total_boxes(&self) -> u64 {
        self.boxes.iter().flatten().sum()
    }

    pub fn images_for(&self, country: Country) -> u64 {
        self.images[country.index()]
    }

    pub fn boxes_for(&self, country: Country, class: DistressClass) -> u64 {
        self.boxes[country.index()][class.index()]
    }

    /// Writes the counts as CSV: one row per country plus a `total` row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "country,images,d00,d10,d20,d40")?;
        for country in Country::ALL {
            let row = self.boxes[country.index()];
            writeln!(
                w,
                "{},{},{},{},{},{}",
                country.as_str(),
                self.images[country.index()],
                row[0],
                row[1],
                row[2],
                row[3],
            )?;
        }
        let totals: Vec<u64> = (0..4)
            .map(|c| self.boxes.iter().map(|r| r[c]).sum())
            .collect();
        writeln!(
            w,
            "total,{},{},{},{},{}",
            self.total_images(),
            totals[0],
            totals[1],
            totals[2],
            totals[3],
        )?;
        Ok(())
    }
}

/// Tallies images and annotations per country. Every record must carry a
/// country, either from its source metadata or inferred from its id.
pub fn compute_stats(records: &[GroundTruthRecord]) -> Result<DatasetStats> {
    let mut stats = DatasetStats::default();
    for record in records {
        let country = record.meta.country.ok_or_else(|| Error::MissingCountry {
            image_id: record.meta.image_id.clone(),
        })?;
        stats.images[country.index()] += 1;
        for ann in &record.annotations {
            stats.boxes[country.index()][ann.class.index()] += 1;
        }
    }
    Ok(stats)
}
