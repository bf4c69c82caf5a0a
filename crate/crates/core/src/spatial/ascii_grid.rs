use std::io::Write;

use super::{GridRaster, SpatialError};

/// Header coordinates at 1e-9 degree resolution, printed without float noise.
fn tidy(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

/// Writes `raster` as an ESRI ASCII grid: six header lines, then rows from
/// north to south with values at three decimals and `-9999` for NODATA.
pub fn export_ascii_grid<W: Write>(raster: &GridRaster, mut out: W) -> Result<(), SpatialError> {
    let spec = &raster.spec;
    writeln!(out, "ncols {}", raster.n_cols)?;
    writeln!(out, "nrows {}", raster.n_rows)?;
    writeln!(out, "xllcorner {}", tidy(spec.xll()))?;
    writeln!(out, "yllcorner {}", tidy(spec.yll()))?;
    writeln!(out, "cellsize {}", tidy(spec.cell_size))?;
    writeln!(out, "NODATA_value -9999")?;
    let mut line = String::with_capacity(raster.n_cols * 10);
    for row in raster.values.chunks(raster.n_cols) {
        line.clear();
        for (i, &v) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            if GridRaster::is_nodata(v) {
                line.push_str("-9999");
            } else {
                line.push_str(&format!("{v:.3}"));
            }
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}
