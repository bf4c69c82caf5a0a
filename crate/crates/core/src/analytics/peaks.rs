use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::ingest::ObservationSeries;
use crate::species::Species;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub species: Species,
    pub station_id: String,
    pub year: i32,
    pub peak_date: NaiveDate,
    pub peak_value: f64,
    pub peak_month: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalProfile {
    pub species: Species,
    pub station_id: String,
    pub year: i32,
    /// January first; `None` for months without data.
    pub monthly_means: [Option<f64>; 12],
    pub max_month: u32,
    pub min_month: u32,
}

fn no_data(series: &ObservationSeries, year: i32) -> AnalyticsError {
    AnalyticsError::NoData(format!("{} {} has no records in {year}", series.station_id, series.species))
}

/// Largest daily value in `year`; ties go to the earliest date.
pub fn detect_annual_peak(series: &ObservationSeries, year: i32) -> Result<PeakReport, AnalyticsError> {
    let peak = series
        .year(year)
        .iter()
        .fold(None, |best: Option<&crate::ingest::Observation>, o| match best {
            Some(b) if b.value >= o.value => Some(b),
            _ => Some(o),
        })
        .ok_or_else(|| no_data(series, year))?;
    Ok(PeakReport {
        species: series.species,
        station_id: series.station_id.clone(),
        year,
        peak_date: peak.date,
        peak_value: peak.value,
        peak_month: peak.date.month(),
    })
}

/// Monthly means for `year` and the months holding the extreme means.
pub fn seasonal_profile(series: &ObservationSeries, year: i32) -> Result<SeasonalProfile, AnalyticsError> {
    let records = series.year(year);
    if records.is_empty() {
        return Err(no_data(series, year));
    }
    let mut sums = [(0.0f64, 0usize); 12];
    for o in records {
        let slot = &mut sums[o.date.month0() as usize];
        slot.0 += o.value;
        slot.1 += 1;
    }
    let monthly_means = sums.map(|(sum, n)| (n > 0).then(|| sum / n as f64));

    let mut max: Option<(usize, f64)> = None;
    let mut min: Option<(usize, f64)> = None;
    for (i, m) in monthly_means.iter().enumerate() {
        let Some(v) = *m else { continue };
        if max.is_none_or(|(_, b)| v > b) {
            max = Some((i, v));
        }
        if min.is_none_or(|(_, b)| v < b) {
            min = Some((i, v));
        }
    }
    // records is non-empty, so at least one month has a mean
    let (max_month, min_month) = (max.unwrap().0 as u32 + 1, min.unwrap().0 as u32 + 1);
    Ok(SeasonalProfile {
        species: series.species,
        station_id: series.station_id.clone(),
        year,
        monthly_means,
        max_month,
        min_month,
    })
}

/// How often each calendar month holds the annual peak across the years
/// that have data. Years without records are skipped.
pub fn peak_month_frequency(series: &ObservationSeries, years: impl IntoIterator<Item = i32>) -> BTreeMap<u32, usize> {
    let mut counts = BTreeMap::new();
    for year in years {
        if let Ok(p) = detect_annual_peak(series, year) {
            *counts.entry(p.peak_month).or_insert(0) += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Observation, Unit};

    fn daily(year: i32, f: impl Fn(NaiveDate) -> f64) -> ObservationSeries {
        let start = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
        let records = start
            .iter_days()
            .take_while(|d| d.year() == year)
            .map(|date| Observation { date, value: f(date) })
            .collect();
        ObservationSeries::new("st", Species::NO2, Unit::UgM3, records).unwrap()
    }

    #[test]
    fn constant_peaks_on_first_day() {
        let s = daily(2013, |_| 42.0);
        let p = detect_annual_peak(&s, 2013).unwrap();
        assert_eq!(p.peak_date, NaiveDate::from_ymd_opt(2013, 1, 1).unwrap());
        assert_eq!(p.peak_value, 42.0);
    }

    #[test]
    fn november_spike() {
        let spike = NaiveDate::from_ymd_opt(2015, 11, 5).unwrap();
        let s = daily(2015, |d| if d == spike { 400.0 } else { 60.0 });
        let p = detect_annual_peak(&s, 2015).unwrap();
        assert_eq!(p.peak_month, 11);
        assert_eq!(p.peak_date, spike);
    }

    #[test]
    fn empty_year() {
        let s = daily(2013, |_| 1.0);
        assert!(matches!(detect_annual_peak(&s, 2014), Err(AnalyticsError::NoData(_))));
        assert!(matches!(seasonal_profile(&s, 2014), Err(AnalyticsError::NoData(_))));
    }

    #[test]
    fn april_only() {
        let s = daily(2017, |d| if d.month() == 4 { 5.0 } else { 0.0 });
        assert_eq!(seasonal_profile(&s, 2017).unwrap().max_month, 4);
    }

    #[test]
    fn flat_profile_ties_to_january() {
        let p = seasonal_profile(&daily(2017, |_| 3.0), 2017).unwrap();
        assert_eq!((p.max_month, p.min_month), (1, 1));
        assert!(p.monthly_means.iter().all(|m| *m == Some(3.0)));
    }

    #[test]
    fn missing_months_are_none() {
        let records = vec![
            Observation { date: NaiveDate::from_ymd_opt(2017, 3, 1).unwrap(), value: 2.0 },
            Observation { date: NaiveDate::from_ymd_opt(2017, 9, 1).unwrap(), value: 1.0 },
        ];
        let s = ObservationSeries::new("st", Species::PM25, Unit::UgM3, records).unwrap();
        let p = seasonal_profile(&s, 2017).unwrap();
        assert_eq!(p.monthly_means[0], None);
        assert_eq!((p.max_month, p.min_month), (3, 9));
    }

    #[test]
    fn frequency_counts_years() {
        let mut records = Vec::new();
        for year in 2011..=2013 {
            let s = daily(year, |d| if d.month() == 11 && d.day() == 3 { 300.0 } else { 50.0 });
            records.extend_from_slice(s.records());
        }
        let s = ObservationSeries::new("st", Species::NO2, Unit::UgM3, records).unwrap();
        let f = peak_month_frequency(&s, 2010..=2013);
        assert_eq!(f, BTreeMap::from([(11, 3)]));
    }
}
