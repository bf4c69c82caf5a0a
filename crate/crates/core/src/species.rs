use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Pollutant species handled by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Species {
    O3,
    SO2,
    CO,
    NO2,
    PM25,
}

impl Species {
    pub const ALL: [Species; 5] = [Species::O3, Species::SO2, Species::CO, Species::NO2, Species::PM25];

    /// The three gases that enter the composite index.
    pub const COMPOSITE: [Species; 3] = [Species::O3, Species::SO2, Species::CO];

    pub fn as_str(&self) -> &'static str {
        match self {
            Species::O3 => "O3",
            Species::SO2 => "SO2",
            Species::CO => "CO",
            Species::NO2 => "NO2",
            Species::PM25 => "PM25",
        }
    }

    /// Molar mass in g/mol. Particulates have none.
    pub fn molar_mass(&self) -> Option<f64> {
        match self {
            Species::CO => Some(28.01),
            Species::O3 => Some(48.00),
            Species::SO2 => Some(64.07),
            Species::NO2 => Some(46.01),
            Species::PM25 => None,
        }
    }

    pub fn is_composite_component(&self) -> bool {
        Species::COMPOSITE.contains(self)
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown species `{0}`")]
pub struct UnknownSpecies(pub String);

impl FromStr for Species {
    type Err = UnknownSpecies;

    /// Accepts the canonical names plus the spellings found in CPCB exports
    /// (`Ozone`, `PM2.5`, `PM 2.5`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '.' && *c != '_')
            .collect::<String>()
            .to_ascii_uppercase();
        match key.as_str() {
            "O3" | "OZONE" => Ok(Species::O3),
            "SO2" => Ok(Species::SO2),
            "CO" => Ok(Species::CO),
            "NO2" => Ok(Species::NO2),
            "PM25" => Ok(Species::PM25),
            _ => Err(UnknownSpecies(s.to_string())),
        }
    }
}
