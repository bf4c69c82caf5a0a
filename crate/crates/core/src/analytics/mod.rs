//! Peak and seasonality diagnostics on daily series, and assembly of the
//! per-city index report.

mod peaks;
mod report;

pub use peaks::{detect_annual_peak, peak_month_frequency, seasonal_profile, PeakReport, SeasonalProfile};
pub use report::{
    build_city_report, write_dsi_table, write_report_json, CityReport, Discrepancy, ExponentRecord, ExponentSource,
    ReportOptions, SpeciesValidation, ValidationOutcome, YearError, YearGasIndices, DEFAULT_DISCREPANCY_TOLERANCE,
    DSI_TABLE_HEADER,
};

use crate::index::IndexError;

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("no data: {0}")]
    NoData(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("serialization failed: {0}")]
    Serialize(String),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}
