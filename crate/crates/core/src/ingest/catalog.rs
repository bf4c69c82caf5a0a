use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::index::ReferenceStandard;
use crate::species::Species;

pub const STATION_CATALOG_HEADER: [&str; 6] = ["station_id", "name", "city", "latitude", "longitude", "altitude_m"];
pub const REFERENCE_STANDARDS_HEADER: [&str; 3] = ["species", "x0_ug_m3", "source"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationMeta {
    pub station_id: String,
    pub name: String,
    #[serde(rename = "city")]
    pub city_label: String,
    pub latitude: f64,
    pub longitude: f64,
    #[serde(rename = "altitude_m")]
    pub altitude: f64,
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), IngestError> {
    let headers = reader.headers()?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(IngestError::InvalidCatalog {
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(())
}

fn line_of(pos: Option<&csv::Position>) -> u64 {
    pos.map_or(0, |p| p.line())
}

/// Reads a station catalog CSV. Station ids must be unique and coordinates
/// within geographic bounds.
pub fn read_station_catalog<R: Read>(input: R) -> Result<Vec<StationMeta>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(&mut reader, &STATION_CATALOG_HEADER)?;
    let mut seen = HashSet::new();
    let mut stations = Vec::new();
    for row in reader.deserialize::<StationMeta>() {
        let station =
            row.map_err(|e| IngestError::InvalidCatalog { line: line_of(e.position()), message: e.to_string() })?;
        let line = stations.len() as u64 + 2;
        if !(-90.0..=90.0).contains(&station.latitude) || !(-180.0..=180.0).contains(&station.longitude) {
            return Err(IngestError::InvalidCatalog {
                line,
                message: format!("coordinates ({}, {}) out of range", station.latitude, station.longitude),
            });
        }
        if !station.altitude.is_finite() {
            return Err(IngestError::InvalidCatalog { line, message: "altitude must be finite".into() });
        }
        if !seen.insert(station.station_id.clone()) {
            return Err(IngestError::InvalidCatalog {
                line,
                message: format!("duplicate station_id `{}`", station.station_id),
            });
        }
        stations.push(station);
    }
    Ok(stations)
}

#[derive(Deserialize)]
struct StandardRow {
    species: String,
    x0_ug_m3: f64,
    source: String,
}

pub fn read_reference_standards<R: Read>(input: R) -> Result<Vec<ReferenceStandard>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(&mut reader, &REFERENCE_STANDARDS_HEADER)?;
    let mut out: Vec<ReferenceStandard> = Vec::new();
    for (i, row) in reader.deserialize::<StandardRow>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| IngestError::InvalidCatalog { line, message: e.to_string() })?;
        let species: Species = row.species.parse().map_err(|e: crate::species::UnknownSpecies| {
            IngestError::InvalidCatalog { line, message: e.to_string() }
        })?;
        if out.iter().any(|s| s.species == species) {
            return Err(IngestError::InvalidCatalog { line, message: format!("duplicate standard for {species}") });
        }
        let standard = ReferenceStandard::new(species, row.x0_ug_m3, row.source)
            .map_err(|e| IngestError::InvalidCatalog { line, message: e.to_string() })?;
        out.push(standard);
    }
    Ok(out)
}

pub fn write_reference_standards<W: Write>(standards: &[ReferenceStandard], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", REFERENCE_STANDARDS_HEADER.join(","))?;
    for s in standards {
        writeln!(out, "{},{},{}", s.species, s.x0, s.source_label)?;
    }
    out.flush()
}
