use rayon::prelude::*;

use super::{GridRaster, GridSpec, SpatialError, StationValue, NODATA};

pub const DEFAULT_POWER: f64 = 2.0;

/// Query points closer than this (in degrees) to a station take its value.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Node {
    lon: f64,
    lat: f64,
    value: f64,
}

/// Inverse distance weighting over a fixed station set.
///
/// Distances use the equirectangular approximation: longitude differences
/// are multiplied by the cosine of a fixed scaling latitude.
#[derive(Debug, Clone)]
pub struct IdwModel {
    nodes: Vec<Node>,
    power: f64,
    lon_scale: f64,
    min_value: f64,
    max_value: f64,
}

impl IdwModel {
    pub fn new(stations: &[StationValue], power: f64, scaling_lat: f64) -> Result<Self, SpatialError> {
        if stations.is_empty() {
            return Err(SpatialError::NoStations);
        }
        if !(power.is_finite() && power > 0.0) {
            return Err(SpatialError::InvalidPower(power));
        }
        let mut nodes: Vec<Node> = Vec::with_capacity(stations.len());
        let mut owners: Vec<&str> = Vec::with_capacity(stations.len());
        for s in stations {
            if !(s.value.is_finite() && s.value >= 0.0) {
                return Err(SpatialError::InvalidStationValue { station: s.meta.station_id.clone(), value: s.value });
            }
            let node = Node { lon: s.meta.longitude, lat: s.meta.latitude, value: s.value };
            match nodes.iter().position(|n| coincident(n, node.lon, node.lat)) {
                Some(i) if nodes[i].value != node.value => {
                    return Err(SpatialError::DuplicateStationCoordinates(
                        owners[i].to_string(),
                        s.meta.station_id.clone(),
                    ));
                }
                Some(_) => {}
                None => {
                    nodes.push(node);
                    owners.push(&s.meta.station_id);
                }
            }
        }
        let min_value = nodes.iter().map(|n| n.value).fold(f64::INFINITY, f64::min);
        let max_value = nodes.iter().map(|n| n.value).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { nodes, power, lon_scale: scaling_lat.to_radians().cos(), min_value, max_value })
    }

    fn distance(&self, n: &Node, lon: f64, lat: f64) -> f64 {
        let dx = (n.lon - lon) * self.lon_scale;
        let dy = n.lat - lat;
        dx.hypot(dy)
    }

    /// Normalised weights of each (deduplicated) station at `(lon, lat)`.
    pub fn weights_at(&self, lon: f64, lat: f64) -> Vec<f64> {
        if let Some(hit) = self.nodes.iter().position(|n| coincident(n, lon, lat)) {
            let mut w = vec![0.0; self.nodes.len()];
            w[hit] = 1.0;
            return w;
        }
        let dists: Vec<f64> = self.nodes.iter().map(|n| self.distance(n, lon, lat)).collect();
        let nearest = dists.iter().copied().fold(f64::INFINITY, f64::min);
        // Ratios to the nearest distance keep large powers from overflowing.
        let raw: Vec<f64> = dists.iter().map(|d| (nearest / d).powf(self.power)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    pub fn value_at(&self, lon: f64, lat: f64) -> f64 {
        let weights = self.weights_at(lon, lat);
        let v: f64 = weights.iter().zip(&self.nodes).map(|(w, n)| w * n.value).sum();
        v.clamp(self.min_value, self.max_value)
    }

    pub fn station_count(&self) -> usize {
        self.nodes.len()
    }
}

fn coincident(n: &Node, lon: f64, lat: f64) -> bool {
    (n.lon - lon).hypot(n.lat - lat) <= COINCIDENCE_TOLERANCE
}

/// Interpolates station values at every cell centre of `spec`.
pub fn idw_interpolate(stations: &[StationValue], spec: &GridSpec, power: f64) -> Result<GridRaster, SpatialError> {
    spec.validate()?;
    let model = IdwModel::new(stations, power, spec.scaling_latitude())?;
    let (n_rows, n_cols) = spec.shape();
    let values: Vec<f64> = (0..n_rows)
        .into_par_iter()
        .flat_map_iter(|row| {
            let model = &model;
            (0..n_cols).map(move |col| {
                let (lon, lat) = spec.cell_center(row, col);
                model.value_at(lon, lat)
            })
        })
        .collect();
    Ok(GridRaster { spec: spec.clone(), n_rows, n_cols, values })
}

/// Replaces cells whose mask entry is `false` with NODATA.
pub fn apply_mask(raster: &mut GridRaster, mask: &[bool]) -> Result<(), SpatialError> {
    if mask.len() != raster.values.len() {
        return Err(SpatialError::MaskMismatch { expected: raster.values.len(), found: mask.len() });
    }
    for (v, keep) in raster.values.iter_mut().zip(mask) {
        if !keep {
            *v = NODATA;
        }
    }
    Ok(())
}
