use airsim_core::spatial::{idw_interpolate, GridSpec, IdwModel, StationValue};
use airsim_core::StationMeta;
use proptest::prelude::*;

fn station(i: usize, lon: f64, lat: f64, value: f64) -> StationValue {
    StationValue {
        meta: StationMeta {
            station_id: format!("s{i:02}"),
            name: format!("Station {i}"),
            city_label: "Test".into(),
            latitude: lat,
            longitude: lon,
            altitude: 0.0,
        },
        value,
    }
}

/// 3-12 stations scattered over a city-sized box near Delhi.
fn stations_strategy() -> impl Strategy<Value = Vec<StationValue>> {
    prop::collection::vec((0.0f64..0.4, 0.0f64..0.4, 0.0f64..300.0), 3..12).prop_map(|v| {
        v.into_iter().enumerate().map(|(i, (dx, dy, value))| station(i, 77.0 + dx, 28.4 + dy, value)).collect()
    })
}

fn spec_for(stations: &[StationValue]) -> GridSpec {
    GridSpec::around(stations, 0.02, 24).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounded_by_station_extremes(stations in stations_strategy()) {
        let r = idw_interpolate(&stations, &spec_for(&stations), 2.0).unwrap();
        let lo = stations.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
        let hi = stations.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(r.values.iter().all(|&v| lo <= v && v <= hi));
        prop_assert_eq!(r.values.len(), r.n_rows * r.n_cols);
    }

    #[test]
    fn exact_at_stations(stations in stations_strategy(), power in 0.5f64..6.0) {
        let model = IdwModel::new(&stations, power, 28.6).unwrap();
        for s in &stations {
            let v = model.value_at(s.meta.longitude, s.meta.latitude);
            prop_assert!((v - s.value).abs() <= 1e-9 * s.value.abs().max(1e-300));
        }
    }

    #[test]
    fn weights_sum_to_one(stations in stations_strategy(), lon in 76.9f64..77.5, lat in 28.3f64..28.9, power in 0.5f64..16.0) {
        let model = IdwModel::new(&stations, power, 28.6).unwrap();
        let w = model.weights_at(lon, lat);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn translation_invariance(stations in stations_strategy(), dlon in -2.0f64..2.0, dlat in -2.0f64..2.0) {
        let spec = spec_for(&stations);
        // Longitude-only shift: the default scaling latitude is unchanged.
        let shift = |dx: f64, dy: f64| -> (Vec<StationValue>, GridSpec) {
            let moved: Vec<_> = stations
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    s.meta.longitude += dx;
                    s.meta.latitude += dy;
                    s
                })
                .collect();
            let mut g = spec.clone();
            g.min_lon += dx;
            g.max_lon += dx;
            g.min_lat += dy;
            g.max_lat += dy;
            (moved, g)
        };
        let base = idw_interpolate(&stations, &spec, 2.0).unwrap();
        let (moved, g) = shift(dlon, 0.0);
        let r = idw_interpolate(&moved, &g, 2.0).unwrap();
        prop_assert_eq!((r.n_rows, r.n_cols), (base.n_rows, base.n_cols));
        for (a, b) in base.values.iter().zip(&r.values) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
        // Latitude shifts keep the equirectangular scale when it is pinned.
        let pinned = spec.clone().with_reference_lat(28.6);
        let base = idw_interpolate(&stations, &pinned, 2.0).unwrap();
        let (moved, g) = shift(dlon, dlat);
        let r = idw_interpolate(&moved, &g.with_reference_lat(28.6), 2.0).unwrap();
        for (a, b) in base.values.iter().zip(&r.values) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn high_power_tracks_nearest(stations in stations_strategy()) {
        let spec = spec_for(&stations);
        let model = IdwModel::new(&stations, 16.0, spec.scaling_latitude()).unwrap();
        let scale = spec.scaling_latitude().to_radians().cos();
        let range = stations.iter().map(|s| s.value).fold(0.0, f64::max);
        let (rows, cols) = spec.shape();
        for row in 0..rows {
            for col in 0..cols {
                let (lon, lat) = spec.cell_center(row, col);
                let mut d: Vec<(f64, f64)> = stations
                    .iter()
                    .map(|s| (((s.meta.longitude - lon) * scale).hypot(s.meta.latitude - lat), s.value))
                    .collect();
                d.sort_by(|a, b| a.0.total_cmp(&b.0));
                // Only cells with a clear nearest station.
                if d[1].0 >= 1.5 * d[0].0 {
                    let bound = range * (stations.len() - 1) as f64 * (1.0f64 / 1.5).powi(16);
                    prop_assert!((model.value_at(lon, lat) - d[0].1).abs() <= bound + 1e-9);
                }
            }
        }
    }
}
