use std::collections::BTreeMap;

use airsim_core::analytics::{
    build_city_report, detect_annual_peak, peak_month_frequency, seasonal_profile, write_dsi_table, write_report_json,
    ReportOptions, ValidationOutcome,
};
use airsim_core::index::validate_reference_bracket;
use airsim_core::ingest::annual_mean;
use airsim_core::spatial::{export_ascii_grid, export_scatter, idw_interpolate, GridSpec, DEFAULT_TARGET_COLUMNS};
use airsim_core::{AnnualAggregate, BracketReport, CityReport, IngestError, Species, StationValue};
use serde::Serialize;

use crate::config::RunConfig;
use crate::data::{read_expected, read_exponents, Dataset};
use crate::diag;
use crate::error::CliError;
use crate::output::{long_csv, slug, Staged};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Completed, but something was excluded or skipped.
    Partial,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Partial => 2,
        }
    }
}

const ASSUMPTIONS: &[&str] = &[
    "daily values are treated as 24-hour means",
    "concentrations normalised to ug/m3; ppb/ppm converted at the configured molar volume",
    "rows with missing, negative or non-finite values are dropped, never imputed",
];

#[derive(Serialize)]
struct Parameters<'a> {
    threshold: f64,
    min_coverage: f64,
    force_coverage: bool,
    years: [i32; 2],
    species: &'a [Species],
    reference_city: Option<&'a str>,
    molar_volume: f64,
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    tool: &'static str,
    version: &'static str,
    assumptions: &'static [&'static str],
    parameters: Parameters<'a>,
    cities: &'a [CityReport],
}

fn index_species(config: &RunConfig) -> Vec<Species> {
    config.species.iter().copied().filter(|s| *s != Species::PM25).collect()
}

fn annual_aggregates(
    ds: &Dataset,
    city: &str,
    species: &[Species],
    config: &RunConfig,
) -> Result<Vec<AnnualAggregate>, CliError> {
    let mut out = Vec::new();
    for &sp in species {
        for s in ds.city_series(city, sp) {
            for year in config.years.clone() {
                match annual_mean(s, year, config.min_coverage) {
                    Ok(a) => out.push(a),
                    Err(IngestError::NoData(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    Ok(out)
}

fn city_reports(ds: &Dataset, config: &RunConfig) -> Result<Vec<CityReport>, CliError> {
    let species = index_species(config);
    let exponents = config.exponents_path.as_deref().map(read_exponents).transpose()?.unwrap_or_default();
    let expected = config.expected_path.as_deref().map(read_expected).transpose()?.unwrap_or_default();

    let mut reports = Vec::new();
    for city in ds.cities_with(&species) {
        let aggregates = annual_aggregates(ds, &city, &species, config)?;
        if aggregates.is_empty() {
            diag::info("NoData", format!("{city}: no index data in {}-{}", config.years.start(), config.years.end()));
            continue;
        }
        let limits = ds.limits_for(&city, config)?;
        let mut options = ReportOptions::new(city.clone());
        options.force = config.force_coverage;
        options.external_exponents = exponents.clone();
        options.expected_composites = expected.get(&city).cloned().unwrap_or_default();
        let report = build_city_report(&aggregates, &ds.standards, &limits, config.v, &options)?;

        for v in report.bracket_exclusions() {
            if let ValidationOutcome::NotBracketed { violation, .. } = &v.outcome {
                diag::warn("ReferenceNotBracketed", format!("{city} {}: {violation}; excluded", v.species));
            }
        }
        for e in &report.year_errors {
            diag::warn(&e.code, format!("{city} {}", e.message));
        }
        for d in report.flagged_discrepancies() {
            diag::warn(
                "CompositeDiscrepancy",
                format!("{city} {}: computed {:.3}, expected {:.3}", d.year, d.computed, d.expected),
            );
        }
        reports.push(report);
    }
    Ok(reports)
}

pub fn compute_dsi(config: &RunConfig, force: bool) -> Result<Outcome, CliError> {
    let ds = Dataset::load(config, &index_species(config))?;
    if ds.series.is_empty() {
        return Err(CliError::NoData(format!("no daily series in {}", config.data_dir.display())));
    }
    let reports = city_reports(&ds, config)?;
    if reports.is_empty() {
        return Err(CliError::NoData("no city has index data in the configured years".into()));
    }

    let doc = ReportDocument {
        tool: "airsim",
        version: env!("CARGO_PKG_VERSION"),
        assumptions: ASSUMPTIONS,
        parameters: Parameters {
            threshold: config.v,
            min_coverage: config.min_coverage,
            force_coverage: config.force_coverage,
            years: [*config.years.start(), *config.years.end()],
            species: &config.species,
            reference_city: config.reference_city.as_deref(),
            molar_volume: config.molar_volume,
        },
        cities: &reports,
    };
    let mut json = Vec::new();
    write_report_json(&doc, &mut json)?;
    let mut table = Vec::new();
    write_dsi_table(&reports, &mut table)?;

    let mut staged = Staged::new(&config.output_dir);
    staged.add("report.json", json);
    staged.add("dsi_table.csv", table);
    for p in staged.commit(force)? {
        diag::info("Wrote", p.display());
    }

    let partial = reports.iter().any(|r| r.bracket_exclusions().next().is_some() || !r.year_errors.is_empty());
    Ok(if partial { Outcome::Partial } else { Outcome::Success })
}

pub fn validate(config: &RunConfig) -> Result<Outcome, CliError> {
    let species = index_species(config);
    let ds = Dataset::load(config, &species)?;
    let sources = match &config.reference_city {
        Some(c) => vec![c.clone()],
        None => ds.cities_with(&species),
    };
    let mut checked = 0usize;
    let mut violations = 0usize;
    for city in &sources {
        let limits = ds.limits_for(city, config)?;
        for sp in &species {
            let Some(standard) = ds.standards.iter().find(|s| s.species == *sp) else {
                diag::info("MissingStandard", format!("{city} {sp}: no reference standard, not checked"));
                continue;
            };
            let Some(lim) = limits.get(sp) else {
                diag::info("NoData", format!("{city} {sp}: no observations in window"));
                continue;
            };
            checked += 1;
            match validate_reference_bracket(*lim, standard.x0) {
                BracketReport::Bracketed => {
                    diag::info("Bracketed", format!("{city} {sp}: {} < {} < {}", lim.lower(), standard.x0, lim.upper()))
                }
                BracketReport::Violation(v) => {
                    violations += 1;
                    println!(
                        "VIOLATION city={city} species={sp} side={} limit={} x0={} margin={}",
                        v.side,
                        v.limit,
                        v.x0,
                        v.margin()
                    );
                }
            }
        }
    }
    if checked == 0 {
        return Err(CliError::NoData("nothing to validate".into()));
    }
    Ok(if violations > 0 { Outcome::Partial } else { Outcome::Success })
}

pub fn interpolate(
    config: &RunConfig,
    city: Option<&str>,
    year: Option<i32>,
    force: bool,
) -> Result<Outcome, CliError> {
    let year =
        year.or(config.pm25_year).ok_or_else(|| CliError::Config("interpolate needs --year or `pm25_year`".into()))?;
    let ds = Dataset::load(config, &[Species::PM25])?;
    let cities = match city {
        Some(c) => vec![c.to_string()],
        None => ds.cities_with(&[Species::PM25]),
    };

    let mut staged = Staged::new(&config.output_dir);
    let mut partial = false;
    for city in &cities {
        let mut stations = Vec::new();
        for s in ds.city_series(city, Species::PM25) {
            let agg = match annual_mean(s, year, config.min_coverage) {
                Ok(a) => a,
                Err(IngestError::NoData(_)) => continue,
                Err(e) => return Err(e.into()),
            };
            if agg.below_coverage && !config.force_coverage {
                diag::warn(
                    "BelowCoverage",
                    format!("{city} {} {year}: coverage {:.3}; excluded", s.station_id, agg.coverage),
                );
                partial = true;
                continue;
            }
            let meta = ds.station(&s.station_id).cloned().expect("series stations come from the catalog");
            stations.push(StationValue { meta, value: agg.mean });
        }
        if stations.is_empty() {
            if cities.len() == 1 {
                return Err(CliError::NoStations(format!("{city}: no PM25 station means for {year}")));
            }
            diag::warn("NoStations", format!("{city}: no PM25 station means for {year}"));
            partial = true;
            continue;
        }

        let mut spec = GridSpec::around(&stations, config.margin, DEFAULT_TARGET_COLUMNS)?;
        if let Some(cell) = config.cell_size {
            spec = GridSpec::new(spec.min_lon, spec.min_lat, spec.max_lon, spec.max_lat, cell, spec.margin)?;
        }
        let raster = idw_interpolate(&stations, &spec, config.power)?;
        if let Some((row, col, value)) = raster.argmax() {
            let (lon, lat) = spec.cell_center(row, col);
            diag::info("GridMax", format!("{city} {year}: {value:.3} at ({lon:.4}, {lat:.4})"));
        }

        let mut grid = Vec::new();
        export_ascii_grid(&raster, &mut grid)?;
        let mut scatter = Vec::new();
        export_scatter(&stations, &mut scatter)?;
        let stem = format!("pm25_{}_{year}", slug(city));
        staged.add(format!("{stem}.asc"), grid);
        staged.add(format!("{stem}_scatter.csv"), scatter);
    }
    if staged.is_empty() {
        return Err(CliError::NoStations(format!("no PM25 stations with data in {year}")));
    }
    for p in staged.commit(force)? {
        diag::info("Wrote", p.display());
    }
    Ok(if partial { Outcome::Partial } else { Outcome::Success })
}

pub fn report_figures(config: &RunConfig, force: bool) -> Result<Outcome, CliError> {
    let gases = index_species(config);
    let mut wanted = config.species.clone();
    if !wanted.contains(&Species::PM25) {
        wanted.push(Species::PM25);
    }
    let ds = Dataset::load(config, &wanted)?;
    let mut staged = Staged::new(&config.output_dir);
    let mut partial = false;

    // Annual concentration per city and gas.
    let mut annual: Vec<(String, String, f64)> = Vec::new();
    for city in ds.cities_with(&gases) {
        for &sp in &gases {
            let mut by_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
            for s in ds.city_series(&city, sp) {
                for year in config.years.clone() {
                    if let Ok(a) = annual_mean(s, year, config.min_coverage) {
                        by_year.entry(year).or_default().push(a.mean);
                    }
                }
            }
            for (year, means) in by_year {
                annual.push((format!("{city}/{sp}"), year.to_string(), means.iter().sum::<f64>() / means.len() as f64));
            }
        }
    }
    if annual.is_empty() {
        diag::warn("NoData", "no trace-gas data; annual concentration and index figures skipped");
        partial = true;
    } else {
        staged
            .add("fig1_annual_concentration.csv", long_csv(annual.iter().map(|(s, k, v)| (s.as_str(), k.clone(), *v))));
        let reports = city_reports(&ds, config)?;
        let rows: Vec<(String, String, f64)> = reports
            .iter()
            .flat_map(|r| r.years.iter().map(|c| (r.city_label.clone(), c.year.to_string(), c.value)))
            .collect();
        if rows.is_empty() {
            diag::warn("NoData", "no composite index could be computed; fig2 skipped");
            partial = true;
        } else {
            staged.add("fig2_dsi.csv", long_csv(rows.iter().map(|(s, k, v)| (s.as_str(), k.clone(), *v))));
        }
    }

    // Daily NO2 and its annual peaks.
    let no2: Vec<_> = ds.series.iter().filter(|s| s.species == Species::NO2).collect();
    if no2.is_empty() {
        diag::warn("NoData", "no NO2 series; fig3 skipped");
        partial = true;
    } else {
        let daily =
            no2.iter().flat_map(|s| s.records().iter().map(|o| (s.station_id.as_str(), o.date.to_string(), o.value)));
        staged.add("fig3_no2_daily.csv", long_csv(daily));
        let mut peaks = Vec::new();
        for s in &no2 {
            let years = s.years();
            for &y in &years {
                let p = detect_annual_peak(s, y).map_err(CliError::Analytics)?;
                peaks.push((s.station_id.as_str(), p.peak_date.to_string(), p.peak_value));
            }
            let freq = peak_month_frequency(s, years.iter().copied());
            let summary: Vec<String> = freq.iter().map(|(m, n)| format!("{m:02}:{n}")).collect();
            diag::info("PeakMonths", format!("{} NO2 {}", s.station_id, summary.join(" ")));
        }
        staged.add("fig3_no2_peaks.csv", long_csv(peaks));
    }

    // Daily and monthly PM2.5 per city.
    let pm_cities = ds.cities_with(&[Species::PM25]);
    if pm_cities.is_empty() {
        diag::warn("NoData", "no PM25 series; daily PM25 figures skipped");
        partial = true;
    }
    for city in pm_cities {
        let series = ds.city_series(&city, Species::PM25);
        let daily = series
            .iter()
            .flat_map(|s| s.records().iter().map(|o| (s.station_id.as_str(), o.date.to_string(), o.value)));
        staged.add(format!("pm25_daily_{}.csv", slug(&city)), long_csv(daily));
        let mut monthly = Vec::new();
        for s in &series {
            for y in s.years() {
                let profile = seasonal_profile(s, y).map_err(CliError::Analytics)?;
                diag::info(
                    "Seasonality",
                    format!(
                        "{city} {} {y}: max month {}, min month {}",
                        s.station_id, profile.max_month, profile.min_month
                    ),
                );
                for (m, mean) in profile.monthly_means.iter().enumerate() {
                    if let Some(v) = mean {
                        monthly.push((s.station_id.as_str(), format!("{y}-{:02}", m + 1), *v));
                    }
                }
            }
        }
        staged.add(format!("pm25_monthly_{}.csv", slug(&city)), long_csv(monthly));
    }

    if staged.is_empty() {
        return Err(CliError::NoData("no series for any figure".into()));
    }
    for p in staged.commit(force)? {
        diag::info("Wrote", p.display());
    }
    Ok(if partial { Outcome::Partial } else { Outcome::Success })
}
