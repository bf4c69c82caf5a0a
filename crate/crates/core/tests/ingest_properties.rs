use airsim_core::ingest::{
    annual_mean, derive_limits, parse_daily_csv, write_generic_csv, FormatProfile, Observation, ObservationSeries, Unit,
};
use airsim_core::Species;
use chrono::NaiveDate;
use proptest::prelude::*;

fn series_strategy() -> impl Strategy<Value = ObservationSeries> {
    // Distinct day offsets from 2011-01-01 with non-negative values.
    prop::collection::btree_map(0u64..1500, 0.0f64..5000.0, 1..200).prop_map(|m| {
        let start = NaiveDate::from_ymd_opt(2011, 1, 1).unwrap();
        let records =
            m.into_iter().map(|(d, value)| Observation { date: start + chrono::Days::new(d), value }).collect();
        ObservationSeries::new("st", Species::SO2, Unit::UgM3, records).unwrap()
    })
}

proptest! {
    #[test]
    fn generic_round_trip(s in series_strategy()) {
        let mut buf = Vec::new();
        write_generic_csv(&s, &mut buf).unwrap();
        let (back, report) = parse_daily_csv(&buf[..], FormatProfile::Generic, "st", Species::SO2).unwrap();
        prop_assert_eq!(back, s);
        prop_assert!(report.skipped.is_empty());
    }

    #[test]
    fn mean_is_linear(s in series_strategy(), c in 0.01f64..100.0) {
        let scaled = s.scaled(c).unwrap();
        for year in s.years() {
            let a = annual_mean(&s, year, 0.0).unwrap();
            let b = annual_mean(&scaled, year, 0.0).unwrap();
            prop_assert!((b.mean - c * a.mean).abs() <= 1e-9 * (c * a.mean).max(1.0));
        }
    }

    #[test]
    fn limits_contain_every_record(s in series_strategy()) {
        let l = derive_limits(std::slice::from_ref(&s), Species::SO2, 2000..=2030).unwrap();
        prop_assert!(l.lower() <= l.upper());
        prop_assert!(s.records().iter().all(|o| l.lower() <= o.value && o.value <= l.upper()));
    }

    /// Rows are either stored or skipped with a reason, never lost.
    #[test]
    fn rows_are_accounted_for(rows in prop::collection::vec((0u32..40, "[-0-9.a-zN]{0,6}"), 1..60)) {
        let mut text = String::from("date,value\n");
        for (day, value) in &rows {
            // Some days land on impossible dates (Feb 30/31) or repeat.
            text.push_str(&format!("2012-02-{:02},{}\n", day, value));
        }
        match parse_daily_csv(text.as_bytes(), FormatProfile::Generic, "st", Species::CO) {
            Ok((series, report)) => {
                prop_assert_eq!(report.total_rows, rows.len());
                prop_assert_eq!(report.stored_rows, series.len());
                prop_assert_eq!(report.stored_rows + report.skipped.len(), report.total_rows);
            }
            Err(airsim_core::IngestError::UnreadableInput(_)) => {}
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }
}
