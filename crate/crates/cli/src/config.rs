//! Run configuration: a flat `key = value` file, overridden by flags.

use std::collections::BTreeMap;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use airsim_core::ingest::{FormatProfile, DEFAULT_MIN_COVERAGE, DEFAULT_MOLAR_VOLUME};
use airsim_core::spatial::{DEFAULT_MARGIN, DEFAULT_POWER};
use airsim_core::{Species, DEFAULT_THRESHOLD};

use crate::error::CliError;

const KEYS: &[&str] = &[
    "standards_path",
    "stations_path",
    "data_dir",
    "output_dir",
    "exponents_path",
    "expected_path",
    "species",
    "years",
    "v",
    "min_coverage",
    "force_coverage",
    "power",
    "cell_size",
    "margin",
    "reference_city",
    "default_profile",
    "molar_volume",
    "pm25_year",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` selects the built-in CPCB standards.
    pub standards_path: Option<PathBuf>,
    pub stations_path: PathBuf,
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    pub exponents_path: Option<PathBuf>,
    pub expected_path: Option<PathBuf>,
    pub species: Vec<Species>,
    pub years: RangeInclusive<i32>,
    pub v: f64,
    pub min_coverage: f64,
    pub force_coverage: bool,
    pub power: f64,
    pub cell_size: Option<f64>,
    pub margin: f64,
    /// City whose observations define the limits for every city.
    pub reference_city: Option<String>,
    pub default_profile: FormatProfile,
    pub molar_volume: f64,
    pub pm25_year: Option<i32>,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub v: Option<f64>,
    pub min_coverage: Option<f64>,
    pub power: Option<f64>,
}

/// Parses `key = value` lines. Blank lines and `#` comments are ignored.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{raw}`")))
}

fn parse_years(raw: &str) -> Result<RangeInclusive<i32>, CliError> {
    let (a, b) = raw.split_once('-').unwrap_or((raw, raw));
    let (a, b): (i32, i32) = (parse_num("years", a.trim())?, parse_num("years", b.trim())?);
    if a > b {
        return Err(CliError::Config(format!("`years`: empty range {raw}")));
    }
    Ok(a..=b)
}

fn parse_bool(key: &str, raw: &str) -> Result<bool, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("`{key}`: expected true/false, got `{raw}`"))),
    }
}

impl RunConfig {
    /// Reads `path` (if any), applies overrides, resolves relative paths
    /// against the config file's directory and validates the result.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let (kv, base) = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (parse_kv(&text)?, base)
            }
            None => (BTreeMap::new(), PathBuf::new()),
        };
        let resolve = |raw: &str| -> PathBuf {
            let p = PathBuf::from(raw);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let get = |k: &str| kv.get(k).map(String::as_str);
        let required = |k: &str| get(k).ok_or_else(|| CliError::Config(format!("missing required key `{k}`")));

        let species = match get("species") {
            Some(list) => list
                .split(',')
                .map(|s| s.trim().parse::<Species>().map_err(|e| CliError::Config(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![Species::O3, Species::SO2, Species::CO, Species::NO2],
        };

        let config = RunConfig {
            standards_path: get("standards_path").map(resolve),
            stations_path: resolve(required("stations_path")?),
            data_dir: resolve(required("data_dir")?),
            output_dir: match (&overrides.output_dir, get("output_dir")) {
                (Some(p), _) => p.clone(),
                (None, Some(raw)) => resolve(raw),
                (None, None) => PathBuf::from("airsim-out"),
            },
            exponents_path: get("exponents_path").map(resolve),
            expected_path: get("expected_path").map(resolve),
            species,
            years: get("years").map_or(Ok(2011..=2014), parse_years)?,
            v: match overrides.v {
                Some(v) => v,
                None => get("v").map_or(Ok(DEFAULT_THRESHOLD), |r| parse_num("v", r))?,
            },
            min_coverage: match overrides.min_coverage {
                Some(v) => v,
                None => get("min_coverage").map_or(Ok(DEFAULT_MIN_COVERAGE), |r| parse_num("min_coverage", r))?,
            },
            force_coverage: get("force_coverage").map_or(Ok(false), |r| parse_bool("force_coverage", r))?,
            power: match overrides.power {
                Some(v) => v,
                None => get("power").map_or(Ok(DEFAULT_POWER), |r| parse_num("power", r))?,
            },
            cell_size: get("cell_size").map(|r| parse_num("cell_size", r)).transpose()?,
            margin: get("margin").map_or(Ok(DEFAULT_MARGIN), |r| parse_num("margin", r))?,
            reference_city: get("reference_city").map(str::to_string),
            default_profile: get("default_profile").map_or(Ok(FormatProfile::Generic), |r| {
                r.parse().map_err(|e: airsim_core::IngestError| CliError::Config(e.to_string()))
            })?,
            molar_volume: get("molar_volume").map_or(Ok(DEFAULT_MOLAR_VOLUME), |r| parse_num("molar_volume", r))?,
            pm25_year: get("pm25_year").map(|r| parse_num("pm25_year", r)).transpose()?,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.v > 0.0 && self.v < 1.0) {
            return Err(CliError::Config(format!("`v` = {} outside (0, 1)", self.v)));
        }
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return Err(CliError::Config(format!("`min_coverage` = {} outside [0, 1]", self.min_coverage)));
        }
        if !(self.power.is_finite() && self.power > 0.0) {
            return Err(CliError::Config(format!("`power` = {} must be positive", self.power)));
        }
        if let Some(c) = self.cell_size {
            if !(c.is_finite() && c > 0.0) {
                return Err(CliError::Config(format!("`cell_size` = {c} must be positive")));
            }
        }
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            return Err(CliError::Config(format!("`margin` = {} must be non-negative", self.margin)));
        }
        if !(self.molar_volume.is_finite() && self.molar_volume > 0.0) {
            return Err(CliError::Config(format!("`molar_volume` = {} must be positive", self.molar_volume)));
        }
        if self.species.is_empty() {
            return Err(CliError::Config("`species` is empty".into()));
        }
        let files = [
            Some(&self.stations_path),
            self.standards_path.as_ref(),
            self.exponents_path.as_ref(),
            self.expected_path.as_ref(),
        ];
        for path in files.into_iter().flatten() {
            if !path.is_file() {
                return Err(CliError::Config(format!("{} does not exist", path.display())));
            }
        }
        if !self.data_dir.is_dir() {
            return Err(CliError::Config(format!("data_dir {} is not a directory", self.data_dir.display())));
        }
        Ok(())
    }
}
