//! JSON and CSV serialization of configurations, contours, halo summaries and sample tables.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::contours::{ContourRecord, OuterContour};
use crate::error::{Error, Result};
use crate::processes::{AngularSample, SurfaceStatistics};
use crate::torus_geometry::{Configuration, Halo, Vec2};

/// JSON form of a configuration: `{"points": [[x, y], …], "L": side}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationRecord {
    pub points: Vec<[f64; 2]>,
    #[serde(rename = "L")]
    pub l: f64,
}

impl From<&Configuration> for ConfigurationRecord {
    fn from(c: &Configuration) -> Self {
        Self {
            points: c.points.iter().map(|p| [p.x, p.y]).collect(),
            l: c.l,
        }
    }
}

impl ConfigurationRecord {
    /// The validated configuration.
    pub fn to_configuration(&self) -> Result<Configuration> {
        let pts: Vec<Vec2> = self.points.iter().map(|p| Vec2::new(p[0], p[1])).collect();
        Configuration::new(&pts, self.l)
    }
}

/// Parses a configuration from JSON.
pub fn read_configuration<R: Read>(reader: R) -> Result<Configuration> {
    let rec: ConfigurationRecord = serde_json::from_reader(reader)?;
    rec.to_configuration()
}

/// Writes a configuration as JSON.
pub fn write_configuration<W: Write>(writer: W, config: &Configuration) -> Result<()> {
    serde_json::to_writer(writer, &ConfigurationRecord::from(config))?;
    Ok(())
}

/// Parses a contour `{n, r[], t[]}` about `center` with reference radius `big_r`.
pub fn read_contour<R: Read>(reader: R, center: Vec2, big_r: f64) -> Result<OuterContour> {
    let rec: ContourRecord = serde_json::from_reader(reader)?;
    OuterContour::from_record(&rec, center, big_r)
}

/// Writes a contour as `{n, r[], t[]}`.
pub fn write_contour<W: Write>(writer: W, contour: &OuterContour) -> Result<()> {
    serde_json::to_writer(writer, &contour.record())?;
    Ok(())
}

/// One row of the halo summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaloSummary {
    pub area: f64,
    pub interior_area: f64,
    pub n_arcs: usize,
    /// Euler characteristic of S, empty when undefined.
    pub chi: Option<i64>,
    /// H¹(∂S⁻).
    pub h1: f64,
}

impl From<&Halo> for HaloSummary {
    fn from(h: &Halo) -> Self {
        Self {
            area: h.area,
            interior_area: h.interior_area,
            n_arcs: h.arcs.len(),
            chi: h.euler(),
            h1: h.interior_boundary_length.abs(),
        }
    }
}

/// Writes serializable rows as CSV with a header.
pub fn write_csv<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one row per halo: area, interior_area, n_arcs, chi, h1.
pub fn write_halo_summaries<W: Write>(writer: W, halos: &[Halo]) -> Result<()> {
    let rows: Vec<HaloSummary> = halos.iter().map(HaloSummary::from).collect();
    write_csv(writer, &rows)
}

/// Writes sample dumps, one row per replica: replica, N, T₁…T_N, B₁…B_N.
///
/// Rows have varying length, so the header names only the fixed columns.
pub fn write_samples<W: Write>(writer: W, samples: &[(AngularSample, Vec<f64>)]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    w.write_record(["replica", "N", "T...", "B..."])?;
    for (i, (s, b)) in samples.iter().enumerate() {
        if b.len() != s.n {
            return Err(Error::Domain(format!(
                "replica {i}: {} bridge values for {} angles",
                b.len(),
                s.n
            )));
        }
        let mut rec = vec![i.to_string(), s.n.to_string()];
        rec.extend(s.t.iter().map(|t| t.to_string()));
        rec.extend(b.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one row of surface statistics per replica.
pub fn write_statistics<W: Write>(writer: W, stats: &[SurfaceStatistics]) -> Result<()> {
    write_csv(writer, stats)
}
