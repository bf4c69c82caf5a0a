use std::ops::RangeInclusive;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{IngestError, ObservationSeries};
use crate::index::LimitPair;
use crate::species::Species;

/// Minimum fraction of days with data before an annual mean is trusted.
pub const DEFAULT_MIN_COVERAGE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualAggregate {
    pub station_id: String,
    pub species: Species,
    pub year: i32,
    /// Arithmetic mean of the year's daily values, µg/m³.
    pub mean: f64,
    pub n_days: usize,
    /// `n_days / days_in_year`.
    pub coverage: f64,
    pub below_coverage: bool,
}

pub fn days_in_year(year: i32) -> u32 {
    if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
        366
    } else {
        365
    }
}

pub fn annual_mean(series: &ObservationSeries, year: i32, min_coverage: f64) -> Result<AnnualAggregate, IngestError> {
    if !(0.0..=1.0).contains(&min_coverage) {
        return Err(IngestError::InvalidMinCoverage(min_coverage));
    }
    let records = series.year(year);
    if records.is_empty() {
        return Err(IngestError::NoData(format!("{} {} has no records in {year}", series.station_id, series.species)));
    }
    let n_days = records.len();
    let mean = records.iter().map(|o| o.value).sum::<f64>() / n_days as f64;
    let coverage = n_days as f64 / f64::from(days_in_year(year));
    Ok(AnnualAggregate {
        station_id: series.station_id.clone(),
        species: series.species,
        year,
        mean,
        n_days,
        coverage,
        below_coverage: coverage < min_coverage,
    })
}

/// Pooled minimum and maximum of all `species` values within `years`.
pub fn derive_limits(
    series: &[ObservationSeries],
    species: Species,
    years: RangeInclusive<i32>,
) -> Result<LimitPair, IngestError> {
    let mut extremes: Option<(f64, f64)> = None;
    for o in series
        .iter()
        .filter(|s| s.species == species)
        .flat_map(|s| s.records())
        .filter(|o| years.contains(&o.date.year()))
    {
        let (lo, hi) = extremes.get_or_insert((o.value, o.value));
        *lo = lo.min(o.value);
        *hi = hi.max(o.value);
    }
    let (lo, hi) = extremes
        .ok_or_else(|| IngestError::NoData(format!("no {species} records in {}-{}", years.start(), years.end())))?;
    LimitPair::new(lo, hi).map_err(|e| IngestError::InvalidSeries(e.to_string()))
}
