//! Deterministic inputs shared by the benchmarks in `benches/`.

use airsim_core::{StationMeta, StationValue};

/// `n` stations spread over a 2x2 degree box with values in [10, 310).
pub fn stations(n: usize) -> Vec<StationValue> {
    (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            StationValue {
                meta: StationMeta {
                    station_id: format!("s{i:03}"),
                    name: format!("Station {i}"),
                    city_label: "Bench".into(),
                    latitude: 28.0 + 2.0 * ((t * 7.31).fract()),
                    longitude: 77.0 + 2.0 * ((t * 3.17 + 0.13).fract()),
                    altitude: 200.0,
                },
                value: 10.0 + 300.0 * ((t * 5.77).fract()),
            }
        })
        .collect()
}

/// Generic-profile daily CSV covering `years` whole years from 2011.
pub fn daily_csv(years: i32) -> String {
    let mut out = String::from("date,value\n");
    for year in 2011..2011 + years {
        for month in 1..=12u32 {
            for day in 1..=28u32 {
                let v = 50.0 + 20.0 * ((month * 31 + day) as f64 * 0.1).sin();
                out.push_str(&format!("{year}-{month:02}-{day:02},{v:.3}\n"));
            }
        }
    }
    out
}
