//! Loading catalogs and daily series from a run directory.
//!
//! Daily files in `data_dir` are named `<station_id>.<species>[.<profile>].<ext>`
//! with `ext` one of `csv`, `txt`, `dat`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use airsim_core::ingest::{
    derive_limits, parse_daily_csv_with, read_reference_standards, read_station_catalog, FormatProfile, ParseOptions,
};
use airsim_core::{IngestError, LimitPair, ObservationSeries, ReferenceStandard, Species, StationMeta};
use serde::Deserialize;

use crate::config::RunConfig;
use crate::diag;
use crate::error::CliError;

pub struct Dataset {
    pub stations: Vec<StationMeta>,
    pub standards: Vec<ReferenceStandard>,
    /// Sorted by station id, then species.
    pub series: Vec<ObservationSeries>,
}

struct DataFile {
    path: PathBuf,
    station_id: String,
    species: Species,
    profile: FormatProfile,
}

fn classify(path: &Path, default_profile: FormatProfile) -> Result<DataFile, String> {
    let name = path.file_name().and_then(|n| n.to_str()).ok_or("non UTF-8 file name")?;
    let parts: Vec<&str> = name.split('.').collect();
    let (stem, ext) = parts.split_at(parts.len() - 1);
    if !["csv", "txt", "dat"].contains(&ext[0].to_ascii_lowercase().as_str()) {
        return Err(format!("unsupported extension in `{name}`"));
    }
    let (station_id, species, profile) = match stem {
        [station, species] => (*station, *species, None),
        [station, species, profile] => (*station, *species, Some(*profile)),
        _ => return Err(format!("`{name}` does not match <station>.<species>[.<profile>].<ext>")),
    };
    let species = species.parse::<Species>().map_err(|e| e.to_string())?;
    let profile = match profile {
        Some(p) => p.parse::<FormatProfile>().map_err(|e| e.to_string())?,
        None => default_profile,
    };
    Ok(DataFile { path: path.to_path_buf(), station_id: station_id.to_string(), species, profile })
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

impl Dataset {
    /// Loads catalogs and every daily file whose species is in `species`.
    pub fn load(config: &RunConfig, species: &[Species]) -> Result<Self, CliError> {
        let stations = read_station_catalog(open(&config.stations_path)?)
            .map_err(|source| CliError::File { path: config.stations_path.clone(), source })?;
        let standards = match &config.standards_path {
            Some(p) => {
                read_reference_standards(open(p)?).map_err(|source| CliError::File { path: p.clone(), source })?
            }
            None => ReferenceStandard::cpcb_defaults(),
        };

        let mut entries: Vec<PathBuf> = fs::read_dir(&config.data_dir)
            .map_err(|e| CliError::io(&config.data_dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        entries.sort();

        let known: BTreeSet<&str> = stations.iter().map(|s| s.station_id.as_str()).collect();
        let mut series = Vec::new();
        for path in entries {
            let file = match classify(&path, config.default_profile) {
                Ok(f) => f,
                Err(msg) => {
                    diag::warn("SkippedFile", msg);
                    continue;
                }
            };
            if !species.contains(&file.species) {
                continue;
            }
            if !known.contains(file.station_id.as_str()) {
                diag::warn(
                    "UnknownStation",
                    format!("{}: `{}` not in station catalog", path.display(), file.station_id),
                );
                continue;
            }
            let mut opts = ParseOptions::new(file.profile, file.station_id.clone(), file.species);
            opts.molar_volume = config.molar_volume;
            let (s, report) = parse_daily_csv_with(open(&file.path)?, &opts)
                .map_err(|source| CliError::File { path: file.path.clone(), source })?;
            let name = path.file_name().unwrap_or_default().to_string_lossy();
            diag::info("Parsed", format!("{name} stored={} skipped={}", report.stored_rows, report.skipped.len()));
            series.push(s);
        }
        series.sort_by(|a, b| (&a.station_id, a.species).cmp(&(&b.station_id, b.species)));
        if let Some(dup) =
            series.windows(2).find(|w| w[0].station_id == w[1].station_id && w[0].species == w[1].species)
        {
            return Err(CliError::Config(format!("more than one file for {} {}", dup[0].station_id, dup[0].species)));
        }
        Ok(Self { stations, standards, series })
    }

    pub fn station(&self, id: &str) -> Option<&StationMeta> {
        self.stations.iter().find(|s| s.station_id == id)
    }

    pub fn city_of(&self, station_id: &str) -> Option<&str> {
        self.station(station_id).map(|s| s.city_label.as_str())
    }

    /// Cities with at least one loaded series of `species`, sorted.
    pub fn cities_with(&self, species: &[Species]) -> Vec<String> {
        let set: BTreeSet<String> = self
            .series
            .iter()
            .filter(|s| species.contains(&s.species))
            .filter_map(|s| self.city_of(&s.station_id).map(str::to_string))
            .collect();
        set.into_iter().collect()
    }

    pub fn city_series(&self, city: &str, species: Species) -> Vec<&ObservationSeries> {
        self.series.iter().filter(|s| s.species == species && self.city_of(&s.station_id) == Some(city)).collect()
    }

    /// Observation limits for the index gases in `config.species`, taken from
    /// `reference_city` when configured, otherwise from `city` itself.
    pub fn limits_for(&self, city: &str, config: &RunConfig) -> Result<BTreeMap<Species, LimitPair>, CliError> {
        let source = config.reference_city.as_deref().unwrap_or(city);
        if !self.stations.iter().any(|s| s.city_label == source) {
            return Err(CliError::Config(format!("reference_city `{source}` has no stations in the catalog")));
        }
        let mut limits = BTreeMap::new();
        for &sp in config.species.iter().filter(|s| **s != Species::PM25) {
            let owned: Vec<ObservationSeries> = self.city_series(source, sp).into_iter().cloned().collect();
            match derive_limits(&owned, sp, config.years.clone()) {
                Ok(l) => {
                    limits.insert(sp, l);
                }
                Err(IngestError::NoData(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(limits)
    }
}

#[derive(Deserialize)]
struct ExponentRow {
    species: String,
    weight_exponent: f64,
}

/// Reads `species,weight_exponent` rows.
pub fn read_exponents(path: &Path) -> Result<BTreeMap<Species, f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let mut out = BTreeMap::new();
    for row in reader.deserialize::<ExponentRow>() {
        let row = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let sp: Species =
            row.species.parse().map_err(|e: airsim_core::species::UnknownSpecies| CliError::Config(e.to_string()))?;
        if !(row.weight_exponent.is_finite() && row.weight_exponent > 0.0) {
            return Err(CliError::Config(format!("{}: exponent for {sp} must be positive", path.display())));
        }
        out.insert(sp, row.weight_exponent);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct ExpectedRow {
    city: String,
    year: i32,
    composite: f64,
}

/// Reads `city,year,composite` rows of externally reported composites.
pub fn read_expected(path: &Path) -> Result<BTreeMap<String, BTreeMap<i32, f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let mut out: BTreeMap<String, BTreeMap<i32, f64>> = BTreeMap::new();
    for row in reader.deserialize::<ExpectedRow>() {
        let row = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        out.entry(row.city).or_default().insert(row.year, row.composite);
    }
    Ok(out)
}
