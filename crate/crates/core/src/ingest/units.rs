use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::species::Species;

/// Molar volume of an ideal gas at 25 °C and 1 atm, L/mol.
pub const DEFAULT_MOLAR_VOLUME: f64 = 24.45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    UgM3,
    MgM3,
    Ppb,
    Ppm,
}

impl Unit {
    pub fn as_str(&self) -> &'static str {
        match self {
            Unit::UgM3 => "ug_m3",
            Unit::MgM3 => "mg_m3",
            Unit::Ppb => "ppb",
            Unit::Ppm => "ppm",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['µ', 'μ'], "u").replace('³', "3");
        match key.as_str() {
            "ug_m3" | "ug/m3" | "ugm3" | "ug/m^3" => Ok(Unit::UgM3),
            "mg_m3" | "mg/m3" | "mgm3" | "mg/m^3" => Ok(Unit::MgM3),
            "ppb" => Ok(Unit::Ppb),
            "ppm" => Ok(Unit::Ppm),
            _ => Err(IngestError::UnknownUnit(s.to_string())),
        }
    }
}

/// Converts a concentration to µg/m³ at the standard molar volume.
pub fn normalize_unit(value: f64, unit: Unit, species: Species) -> Result<f64, IngestError> {
    normalize_unit_with(value, unit, species, DEFAULT_MOLAR_VOLUME)
}

/// Converts a concentration to µg/m³ with an explicit molar volume (L/mol),
/// for stations far from sea-level conditions.
pub fn normalize_unit_with(value: f64, unit: Unit, species: Species, molar_volume: f64) -> Result<f64, IngestError> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(IngestError::InvalidValue(value));
    }
    match unit {
        Unit::UgM3 => Ok(value),
        Unit::MgM3 => Ok(value * 1000.0),
        Unit::Ppb | Unit::Ppm => {
            let mass = species.molar_mass().ok_or(IngestError::UnsupportedConversion { unit, species })?;
            let ppb = if unit == Unit::Ppm { value * 1000.0 } else { value };
            Ok(ppb * mass / molar_volume)
        }
    }
}
