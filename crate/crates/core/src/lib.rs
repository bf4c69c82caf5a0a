//! Delhi Similarity Index toolkit.
//!
//! Compares a city's annual trace-gas concentrations with regulatory
//! reference standards through a weighted Bray–Curtis similarity, combines
//! the per-gas values into a composite index, and ships the supporting
//! plumbing: daily observation ingest, PM 2.5 inverse-distance interpolation
//! onto ESRI ASCII grids, and seasonal peak diagnostics.
//!
//! All computations are pure functions over owned or borrowed inputs and are
//! safe to call from multiple threads.

pub mod analytics;
pub mod index;
pub mod ingest;
pub mod spatial;
pub mod species;

pub use analytics::{AnalyticsError, CityReport, PeakReport, ReportOptions, SeasonalProfile};
pub use index::{
    classify_band, compute_composite_index, compute_gas_index, compute_weight_exponents, validate_reference_bracket,
    BracketReport, CompositeIndex, GasIndex, IndexError, LimitPair, ReferenceStandard, SimilarityBand, WeightExponents,
    DEFAULT_THRESHOLD,
};
pub use ingest::{AnnualAggregate, IngestError, Observation, ObservationSeries, StationMeta, Unit};
pub use spatial::{GridRaster, GridSpec, SpatialError, StationValue};
pub use species::Species;
