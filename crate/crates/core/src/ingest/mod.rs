//! Daily observation ingest: file parsing, unit normalisation, annual
//! aggregation and observation limits.

mod aggregate;
mod catalog;
mod parse;
mod units;

pub use aggregate::{annual_mean, days_in_year, derive_limits, AnnualAggregate, DEFAULT_MIN_COVERAGE};
pub use catalog::{
    read_reference_standards, read_station_catalog, write_reference_standards, StationMeta, REFERENCE_STANDARDS_HEADER,
    STATION_CATALOG_HEADER,
};
pub use parse::{
    parse_daily_csv, parse_daily_csv_with, write_generic_csv, FormatProfile, ParseOptions, ParseReport, SkipReason,
    SkippedRow,
};
pub use units::{normalize_unit, normalize_unit_with, Unit, DEFAULT_MOLAR_VOLUME};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::species::Species;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("unreadable input: {0}")]
    UnreadableInput(String),
    #[error("unknown format profile `{0}`")]
    UnknownProfile(String),
    #[error("cannot convert {unit} to µg/m³ for {species}")]
    UnsupportedConversion { unit: Unit, species: Species },
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("invalid value {0}: expected a finite non-negative concentration")]
    InvalidValue(f64),
    #[error("no data: {0}")]
    NoData(String),
    #[error("min_coverage {0} outside [0, 1]")]
    InvalidMinCoverage(f64),
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("invalid catalog line {line}: {message}")]
    InvalidCatalog { line: u64, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One daily value in µg/m³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: NaiveDate,
    pub value: f64,
}

/// Dated daily concentrations for one station and species, normalised to
/// µg/m³. Dates are strictly increasing and values finite and non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSeries {
    pub station_id: String,
    pub species: Species,
    /// Unit the source file reported values in, before normalisation.
    pub unit_of_record: Unit,
    records: Vec<Observation>,
}

impl ObservationSeries {
    pub fn new(
        station_id: impl Into<String>,
        species: Species,
        unit_of_record: Unit,
        records: Vec<Observation>,
    ) -> Result<Self, IngestError> {
        if let Some(bad) = records.iter().find(|o| !(o.value.is_finite() && o.value >= 0.0)) {
            return Err(IngestError::InvalidSeries(format!("value {} on {}", bad.value, bad.date)));
        }
        if let Some(w) = records.windows(2).find(|w| w[0].date >= w[1].date) {
            return Err(IngestError::InvalidSeries(format!("dates not strictly increasing at {}", w[1].date)));
        }
        Ok(Self { station_id: station_id.into(), species, unit_of_record, records })
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records falling in calendar year `year`.
    pub fn year(&self, year: i32) -> &[Observation] {
        let start = self.records.partition_point(|o| o.date.year() < year);
        let end = self.records.partition_point(|o| o.date.year() <= year);
        &self.records[start..end]
    }

    /// Distinct years present, ascending.
    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.records.iter().map(|o| o.date.year()).collect();
        years.dedup();
        years
    }

    /// Same series with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, IngestError> {
        let records = self.records.iter().map(|o| Observation { date: o.date, value: o.value * factor }).collect();
        Self::new(self.station_id.clone(), self.species, self.unit_of_record, records)
    }
}
