//! Point-to-raster interpolation of station annual means and the plain-text
//! exports behind the interpolation and scatter figures.

mod ascii_grid;
mod idw;
mod scatter;

pub use ascii_grid::export_ascii_grid;
pub use idw::{apply_mask, idw_interpolate, IdwModel, COINCIDENCE_TOLERANCE, DEFAULT_POWER};
pub use scatter::{export_scatter, SCATTER_HEADER};

use serde::{Deserialize, Serialize};

use crate::ingest::StationMeta;

/// Sentinel written for masked cells.
pub const NODATA: f64 = -9999.0;

pub const DEFAULT_MARGIN: f64 = 0.02;
pub const DEFAULT_TARGET_COLUMNS: usize = 200;

#[derive(Debug, thiserror::Error)]
pub enum SpatialError {
    #[error("no stations to interpolate")]
    NoStations,
    #[error("stations `{0}` and `{1}` share coordinates but report different values")]
    DuplicateStationCoordinates(String, String),
    #[error("station `{station}` has invalid value {value}")]
    InvalidStationValue { station: String, value: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("IDW power {0} must be positive and finite")]
    InvalidPower(f64),
    #[error("mask has {found} cells, raster has {expected}")]
    MaskMismatch { expected: usize, found: usize },
    #[error("write failed: {0}")]
    SinkFailure(#[from] std::io::Error),
}

/// Annual mean PM 2.5 at one station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationValue {
    pub meta: StationMeta,
    /// µg/m³.
    pub value: f64,
}

/// Geographic extent and resolution of an output grid. The rastered area is
/// the bounding box grown by `margin` on every side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
    pub cell_size: f64,
    pub margin: f64,
    /// Latitude whose cosine scales longitude differences. Defaults to the
    /// centre of the extent.
    #[serde(default)]
    pub reference_lat: Option<f64>,
}

impl GridSpec {
    pub fn new(
        min_lon: f64,
        min_lat: f64,
        max_lon: f64,
        max_lat: f64,
        cell_size: f64,
        margin: f64,
    ) -> Result<Self, SpatialError> {
        let spec = Self { min_lon, min_lat, max_lon, max_lat, cell_size, margin, reference_lat: None };
        spec.validate()?;
        Ok(spec)
    }

    /// Extent covering all stations plus `margin`, with a cell size giving
    /// roughly `target_cols` columns.
    pub fn around(stations: &[StationValue], margin: f64, target_cols: usize) -> Result<Self, SpatialError> {
        if stations.is_empty() {
            return Err(SpatialError::NoStations);
        }
        let lons = stations.iter().map(|s| s.meta.longitude);
        let lats = stations.iter().map(|s| s.meta.latitude);
        let min_lon = lons.clone().fold(f64::INFINITY, f64::min);
        let max_lon = lons.fold(f64::NEG_INFINITY, f64::max);
        let min_lat = lats.clone().fold(f64::INFINITY, f64::min);
        let max_lat = lats.fold(f64::NEG_INFINITY, f64::max);
        if margin <= 0.0 && (min_lon == max_lon || min_lat == max_lat) {
            return Err(SpatialError::InvalidGrid("stations are collinear and margin is zero".into()));
        }
        let width = max_lon - min_lon + 2.0 * margin;
        // Rounded so the grid header does not carry float noise.
        let cell_size = (width / target_cols.max(2) as f64 * 1e9).round() / 1e9;
        // Degenerate extents (single station) get a square box.
        let (max_lon, max_lat) = (max_lon.max(min_lon + cell_size), max_lat.max(min_lat + cell_size));
        Self::new(min_lon, min_lat, max_lon, max_lat, cell_size, margin)
    }

    pub fn with_reference_lat(mut self, lat: f64) -> Self {
        self.reference_lat = Some(lat);
        self
    }

    fn validate(&self) -> Result<(), SpatialError> {
        let fields = [self.min_lon, self.min_lat, self.max_lon, self.max_lat, self.cell_size, self.margin];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(SpatialError::InvalidGrid("non-finite grid parameter".into()));
        }
        if self.max_lon <= self.min_lon || self.max_lat <= self.min_lat {
            return Err(SpatialError::InvalidGrid("empty extent".into()));
        }
        if self.cell_size <= 0.0 || self.margin < 0.0 {
            return Err(SpatialError::InvalidGrid("cell_size must be positive and margin non-negative".into()));
        }
        let (rows, cols) = self.shape();
        if rows < 2 || cols < 2 {
            return Err(SpatialError::InvalidGrid(format!("grid is {rows}x{cols}, need at least 2x2")));
        }
        Ok(())
    }

    pub fn xll(&self) -> f64 {
        self.min_lon - self.margin
    }

    pub fn yll(&self) -> f64 {
        self.min_lat - self.margin
    }

    /// `(n_rows, n_cols)`.
    pub fn shape(&self) -> (usize, usize) {
        let span = |lo: f64, hi: f64| {
            let n = (hi - lo + 2.0 * self.margin) / self.cell_size;
            // Absorb rounding so an exact multiple does not gain a column.
            (n - 1e-9).ceil().max(0.0) as usize
        };
        (span(self.min_lat, self.max_lat), span(self.min_lon, self.max_lon))
    }

    /// Centre of cell `(row, col)`, rows counted from the top.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        let (rows, _) = self.shape();
        let lon = self.xll() + (col as f64 + 0.5) * self.cell_size;
        let lat = self.yll() + ((rows - row) as f64 - 0.5) * self.cell_size;
        (lon, lat)
    }

    pub fn scaling_latitude(&self) -> f64 {
        self.reference_lat.unwrap_or(0.5 * (self.min_lat + self.max_lat))
    }
}

/// Row-major raster, first row northernmost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRaster {
    pub spec: GridSpec,
    pub n_rows: usize,
    pub n_cols: usize,
    pub values: Vec<f64>,
}

impl GridRaster {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn is_nodata(value: f64) -> bool {
        value == NODATA
    }

    /// Values excluding NODATA cells.
    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|v| !Self::is_nodata(*v))
    }

    /// Position and value of the largest valid cell.
    pub fn argmax(&self) -> Option<(usize, usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !Self::is_nodata(**v))
            .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
            .map(|(i, v)| (i / self.n_cols, i % self.n_cols, v))
    }
}
