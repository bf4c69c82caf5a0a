use std::io::Write;

use super::{SpatialError, StationValue};

pub const SCATTER_HEADER: &str = "station_id,longitude,latitude,value_ug_m3";

/// Writes one CSV row per station, sorted by station id.
pub fn export_scatter<W: Write>(stations: &[StationValue], mut out: W) -> Result<(), SpatialError> {
    if stations.is_empty() {
        return Err(SpatialError::NoStations);
    }
    let mut sorted: Vec<&StationValue> = stations.iter().collect();
    sorted.sort_by(|a, b| a.meta.station_id.cmp(&b.meta.station_id));
    writeln!(out, "{SCATTER_HEADER}")?;
    for s in sorted {
        writeln!(out, "{},{},{},{:.3}", s.meta.station_id, s.meta.longitude, s.meta.latitude, s.value)?;
    }
    out.flush()?;
    Ok(())
}
