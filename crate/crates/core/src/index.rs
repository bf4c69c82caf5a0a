//! Similarity index kernel.
//!
//! A concentration `x` is compared against a reference standard `x0` through
//! the Bray–Curtis style deviation `|x - x0| / (x + x0)`. The per-gas index is
//! `(1 - deviation)^w`, where the weight exponent `w` is calibrated so that the
//! observed lower and upper limits of a data set land exactly on the threshold
//! `V` (0.8 by default). The composite index is the weighted geometric mean of
//! the O3, SO2 and CO indices.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::species::Species;

/// Default similarity threshold marking entry into the very-high band.
pub const DEFAULT_THRESHOLD: f64 = 0.8;

/// Tolerance used when checking that user supplied composite weights sum to one.
const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndexError {
    #[error("reference {x0} is not bracketed: {side} limit {limit} violates by {margin}")]
    ReferenceNotBracketed {
        side: BracketSide,
        limit: f64,
        x0: f64,
        /// Non-negative distance by which the limit sits on the wrong side of `x0`.
        margin: f64,
    },
    #[error("degenerate limit: {0}")]
    DegenerateLimit(String),
    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("non-finite input: {0}")]
    NonFiniteInput(&'static str),
    #[error("concentration {0} is negative")]
    NegativeConcentration(f64),
    #[error("reference concentration {0} must be positive and finite")]
    InvalidReference(f64),
    #[error("invalid limits [{lower}, {upper}]: need 0 <= lower <= upper, both finite")]
    InvalidLimits { lower: f64, upper: f64 },
    #[error("weight exponent {0} must be positive and finite")]
    NonPositiveWeight(f64),
    #[error("missing composite component {0}")]
    MissingComponent(Species),
    #[error("{0} is not a composite component")]
    UnexpectedComponent(Species),
    #[error("component {species} = {value} outside [0, 1]")]
    ComponentOutOfRange { species: Species, value: f64 },
    #[error("invalid composite weights: {0}")]
    InvalidWeights(String),
    #[error("value {0} outside [0, 1]")]
    ValueOutOfRange(f64),
}

/// Which end of a [`LimitPair`] fails to bracket the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketSide {
    Lower,
    Upper,
}

impl fmt::Display for BracketSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BracketSide::Lower => "lower",
            BracketSide::Upper => "upper",
        })
    }
}

/// Regulatory reference concentration for one species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceStandard {
    pub species: Species,
    /// Concentration in µg/m³.
    pub x0: f64,
    pub source_label: String,
}

impl ReferenceStandard {
    pub fn new(species: Species, x0: f64, source_label: impl Into<String>) -> Result<Self, IndexError> {
        check_reference(x0)?;
        Ok(Self { species, x0, source_label: source_label.into() })
    }

    /// CPCB values used for the DSI gases, in µg/m³.
    pub fn cpcb_defaults() -> Vec<ReferenceStandard> {
        [(Species::O3, 100.0), (Species::SO2, 50.0), (Species::CO, 2000.0)]
            .into_iter()
            .map(|(species, x0)| ReferenceStandard { species, x0, source_label: "CPCB NAAQS".into() })
            .collect()
    }
}

/// Observed lower/upper concentration limits of a data set, in µg/m³.
///
/// Construction accepts `0 <= lower <= upper` so that degenerate observation
/// windows (zeros, constant series) can still be diagnosed by
/// [`compute_weight_exponents`] instead of being rejected up front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitPair {
    lower: f64,
    upper: f64,
}

impl LimitPair {
    pub fn new(lower: f64, upper: f64) -> Result<Self, IndexError> {
        if !lower.is_finite() || !upper.is_finite() || lower < 0.0 || lower > upper {
            return Err(IndexError::InvalidLimits { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

/// Exponents calibrating the per-gas index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightExponents {
    w_a: f64,
    w_b: f64,
    w_x: f64,
}

impl WeightExponents {
    /// A single externally supplied exponent (for instance a published
    /// table value whose underlying limits are unknown). Lower and upper
    /// exponents are taken equal to it.
    pub fn external(w_x: f64) -> Result<Self, IndexError> {
        check_weight(w_x)?;
        Ok(Self { w_a: w_x, w_b: w_x, w_x })
    }

    pub fn lower(&self) -> f64 {
        self.w_a
    }

    pub fn upper(&self) -> f64 {
        self.w_b
    }

    /// Geometric mean of the lower and upper exponents.
    pub fn combined(&self) -> f64 {
        self.w_x
    }
}

/// Five 0.2-wide similarity bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SimilarityBand {
    VeryLow,
    Low,
    Moderate,
    High,
    VeryHigh,
}

impl SimilarityBand {
    pub const ALL: [SimilarityBand; 5] = [
        SimilarityBand::VeryLow,
        SimilarityBand::Low,
        SimilarityBand::Moderate,
        SimilarityBand::High,
        SimilarityBand::VeryHigh,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SimilarityBand::VeryLow => "VeryLow",
            SimilarityBand::Low => "Low",
            SimilarityBand::Moderate => "Moderate",
            SimilarityBand::High => "High",
            SimilarityBand::VeryHigh => "VeryHigh",
        }
    }
}

impl fmt::Display for SimilarityBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-gas similarity value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasIndex {
    pub species: Species,
    pub value: f64,
    pub band: SimilarityBand,
}

impl GasIndex {
    pub fn new(species: Species, value: f64) -> Result<Self, IndexError> {
        let band = classify_band(value)?;
        Ok(Self { species, value, band })
    }
}

/// Composite similarity value for one city and year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeIndex {
    pub city_label: String,
    pub year: i32,
    pub value: f64,
    pub band: SimilarityBand,
    pub components: Vec<GasIndex>,
}

impl CompositeIndex {
    /// Builds the composite from exactly one index per composite gas.
    pub fn from_components(
        city_label: impl Into<String>,
        year: i32,
        components: Vec<GasIndex>,
        weights: Option<&BTreeMap<Species, f64>>,
    ) -> Result<Self, IndexError> {
        let mut map = BTreeMap::new();
        for c in &components {
            if map.insert(c.species, c.value).is_some() {
                return Err(IndexError::InvalidWeights(format!("duplicate component {}", c.species)));
            }
        }
        let value = compute_composite_index(&map, weights)?;
        let mut components = components;
        components.sort_by_key(|c| c.species);
        Ok(Self { city_label: city_label.into(), year, value, band: classify_band(value)?, components })
    }
}

fn check_reference(x0: f64) -> Result<(), IndexError> {
    if x0.is_finite() && x0 > 0.0 {
        Ok(())
    } else {
        Err(IndexError::InvalidReference(x0))
    }
}

fn check_weight(w: f64) -> Result<(), IndexError> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(IndexError::NonPositiveWeight(w))
    }
}

fn deviation(x: f64, x0: f64) -> f64 {
    ((x - x0) / (x + x0)).abs()
}

/// Derives `(w_a, w_b, w_x)` from the observed limits and threshold `v`.
///
/// Requires `lower < x0 < upper`; an unbracketed reference is the failure
/// mode that rules NO2 out of the index.
pub fn compute_weight_exponents(x0: f64, limits: LimitPair, v: f64) -> Result<WeightExponents, IndexError> {
    if !(v > 0.0 && v < 1.0) {
        return Err(IndexError::InvalidThreshold(v));
    }
    check_reference(x0)?;
    let (lower, upper) = (limits.lower, limits.upper);
    if lower == 0.0 {
        return Err(IndexError::DegenerateLimit("lower limit is zero".into()));
    }
    if lower == upper {
        return Err(IndexError::DegenerateLimit(format!("empty bracket: lower = upper = {lower}")));
    }
    if lower == x0 || upper == x0 {
        return Err(IndexError::DegenerateLimit(format!("a limit equals the reference {x0}")));
    }
    if let BracketReport::Violation(v) = validate_reference_bracket(limits, x0) {
        return Err(v.into());
    }

    let ln_v = v.ln();
    let w_a = ln_v / (1.0 - deviation(lower, x0)).ln();
    let w_b = ln_v / (1.0 - deviation(upper, x0)).ln();
    let w_x = (w_a * w_b).sqrt();
    for w in [w_a, w_b, w_x] {
        if !(w.is_finite() && w > 0.0) {
            return Err(IndexError::DegenerateLimit(format!("exponent evaluated to {w}")));
        }
    }
    Ok(WeightExponents { w_a, w_b, w_x })
}

/// Per-gas index `(1 - |x - x0| / (x + x0))^w_x`.
pub fn compute_gas_index(x: f64, x0: f64, w_x: f64) -> Result<f64, IndexError> {
    if !x.is_finite() {
        return Err(IndexError::NonFiniteInput("concentration"));
    }
    if !x0.is_finite() {
        return Err(IndexError::NonFiniteInput("reference"));
    }
    if x < 0.0 {
        return Err(IndexError::NegativeConcentration(x));
    }
    check_reference(x0)?;
    check_weight(w_x)?;
    let base = (1.0 - deviation(x, x0)).clamp(0.0, 1.0);
    Ok(base.powf(w_x))
}

/// Weighted geometric mean of the O3, SO2 and CO indices (uniform 1/3
/// weights unless `weights` is given).
pub fn compute_composite_index(
    components: &BTreeMap<Species, f64>,
    weights: Option<&BTreeMap<Species, f64>>,
) -> Result<f64, IndexError> {
    for species in Species::COMPOSITE {
        if !components.contains_key(&species) {
            return Err(IndexError::MissingComponent(species));
        }
    }
    for (&species, &value) in components {
        if !species.is_composite_component() {
            return Err(IndexError::UnexpectedComponent(species));
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(IndexError::ComponentOutOfRange { species, value });
        }
    }

    let uniform = 1.0 / Species::COMPOSITE.len() as f64;
    let weight_of = |s: &Species| weights.map_or(uniform, |w| w[s]);
    if let Some(w) = weights {
        if w.len() != Species::COMPOSITE.len() || Species::COMPOSITE.iter().any(|s| !w.contains_key(s)) {
            return Err(IndexError::InvalidWeights("weights must cover exactly O3, SO2 and CO".into()));
        }
        if w.values().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(IndexError::InvalidWeights("weights must be positive".into()));
        }
        let sum: f64 = w.values().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(IndexError::InvalidWeights(format!("weights sum to {sum}, expected 1")));
        }
    }

    if components.values().any(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let log_sum: f64 = components.iter().map(|(s, v)| weight_of(s) * v.ln()).sum();
    let lo = components.values().copied().fold(f64::INFINITY, f64::min);
    let hi = components.values().copied().fold(f64::NEG_INFINITY, f64::max);
    // The mean of positive weights summing to one is convex; clamp away rounding.
    Ok(log_sum.exp().clamp(lo, hi))
}

/// Maps a value in `[0, 1]` to its band. Interval boundaries belong to the
/// upper band and 1.0 is very high.
pub fn classify_band(value: f64) -> Result<SimilarityBand, IndexError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(IndexError::ValueOutOfRange(value));
    }
    Ok(if value < 0.2 {
        SimilarityBand::VeryLow
    } else if value < 0.4 {
        SimilarityBand::Low
    } else if value < 0.6 {
        SimilarityBand::Moderate
    } else if value < 0.8 {
        SimilarityBand::High
    } else {
        SimilarityBand::VeryHigh
    })
}

/// A failed bracketing check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketViolation {
    pub side: BracketSide,
    /// The observed extreme on the offending side.
    pub limit: f64,
    pub x0: f64,
}

impl BracketViolation {
    pub fn margin(&self) -> f64 {
        match self.side {
            BracketSide::Lower => self.limit - self.x0,
            BracketSide::Upper => self.x0 - self.limit,
        }
    }
}

impl fmt::Display for BracketViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            BracketSide::Lower => write!(f, "lower limit {} >= reference {}", self.limit, self.x0),
            BracketSide::Upper => write!(f, "upper limit {} <= reference {}", self.limit, self.x0),
        }
    }
}

impl From<BracketViolation> for IndexError {
    fn from(v: BracketViolation) -> Self {
        IndexError::ReferenceNotBracketed { side: v.side, limit: v.limit, x0: v.x0, margin: v.margin() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BracketReport {
    Bracketed,
    Violation(BracketViolation),
}

impl BracketReport {
    pub fn is_bracketed(&self) -> bool {
        matches!(self, BracketReport::Bracketed)
    }
}

/// Checks `lower < x0 < upper`. Equality on either side is a violation.
/// When both sides fail the lower side is reported.
pub fn validate_reference_bracket(limits: LimitPair, x0: f64) -> BracketReport {
    if limits.lower >= x0 {
        BracketReport::Violation(BracketViolation { side: BracketSide::Lower, limit: limits.lower, x0 })
    } else if limits.upper <= x0 {
        BracketReport::Violation(BracketViolation { side: BracketSide::Upper, limit: limits.upper, x0 })
    } else {
        BracketReport::Bracketed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    fn limits(a: f64, b: f64) -> LimitPair {
        LimitPair::new(a, b).unwrap()
    }

    #[test]
    fn exponents_at_point_two_deviation_are_one() {
        let w = compute_weight_exponents(100.0, limits(200.0 / 3.0, 150.0), 0.8).unwrap();
        assert!(rel_eq(w.lower(), 1.0, 1e-12));
        assert!(rel_eq(w.upper(), 1.0, 1e-12));
        assert!(rel_eq(w.combined(), 1.0, 1e-12));
    }

    #[test]
    fn exponents_at_one_third_deviation() {
        // ln(0.8) / ln(2/3)
        let expected = 0.550_339_713_213_208_5;
        let w = compute_weight_exponents(100.0, limits(50.0, 200.0), 0.8).unwrap();
        assert!(rel_eq(w.lower(), expected, 1e-12));
        assert!(rel_eq(w.upper(), expected, 1e-12));
        assert!(rel_eq(w.combined(), expected, 1e-12));
    }

    #[test]
    fn lower_limit_above_reference_is_not_bracketed() {
        match compute_weight_exponents(100.0, limits(120.0, 300.0), 0.8) {
            Err(IndexError::ReferenceNotBracketed { side, limit, margin, .. }) => {
                assert_eq!(side, BracketSide::Lower);
                assert_eq!(limit, 120.0);
                assert_eq!(margin, 20.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_limits_are_distinct_from_bracketing() {
        for (a, b) in [(0.0, 200.0), (100.0, 200.0), (50.0, 100.0), (80.0, 80.0)] {
            assert!(
                matches!(compute_weight_exponents(100.0, limits(a, b), 0.8), Err(IndexError::DegenerateLimit(_))),
                "({a}, {b})"
            );
        }
    }

    #[test]
    fn threshold_must_be_open_unit_interval() {
        for v in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                compute_weight_exponents(100.0, limits(50.0, 200.0), v),
                Err(IndexError::InvalidThreshold(_))
            ));
        }
    }

    #[test]
    fn limit_pair_rejects_inverted_and_negative() {
        assert!(LimitPair::new(5.0, 1.0).is_err());
        assert!(LimitPair::new(-1.0, 1.0).is_err());
        assert!(LimitPair::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn gas_index_examples() {
        assert_eq!(compute_gas_index(100.0, 100.0, 0.12).unwrap(), 1.0);
        // 0.5^0.12 evaluated independently
        assert!(rel_eq(compute_gas_index(300.0, 100.0, 0.12).unwrap(), 0.920_187_650_624_875_1, 1e-12));
        assert_eq!(compute_gas_index(0.0, 100.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn gas_index_errors() {
        assert!(matches!(compute_gas_index(f64::NAN, 100.0, 0.1), Err(IndexError::NonFiniteInput(_))));
        assert!(matches!(compute_gas_index(f64::INFINITY, 100.0, 0.1), Err(IndexError::NonFiniteInput(_))));
        assert!(matches!(compute_gas_index(10.0, 100.0, 0.0), Err(IndexError::NonPositiveWeight(_))));
        assert!(matches!(compute_gas_index(10.0, 100.0, -1.0), Err(IndexError::NonPositiveWeight(_))));
        assert!(matches!(compute_gas_index(-1.0, 100.0, 0.1), Err(IndexError::NegativeConcentration(_))));
    }

    fn comps(co: f64, so2: f64, o3: f64) -> BTreeMap<Species, f64> {
        BTreeMap::from([(Species::CO, co), (Species::SO2, so2), (Species::O3, o3)])
    }

    #[test]
    fn composite_of_ones() {
        assert_eq!(compute_composite_index(&comps(1.0, 1.0, 1.0), None).unwrap(), 1.0);
    }

    #[test]
    fn composite_matches_cube_root() {
        let v = compute_composite_index(&comps(0.085, 0.561, 0.998), None).unwrap();
        assert!(rel_eq(v, (0.085f64 * 0.561 * 0.998).cbrt(), 1e-12));
        assert!((v - 0.3624).abs() < 5e-5);
    }

    #[test]
    fn composite_zero_component() {
        assert_eq!(compute_composite_index(&comps(0.0, 0.5, 0.9), None).unwrap(), 0.0);
    }

    #[test]
    fn composite_missing_and_unexpected() {
        let mut m = comps(0.9, 0.9, 0.9);
        m.remove(&Species::CO);
        assert_eq!(compute_composite_index(&m, None), Err(IndexError::MissingComponent(Species::CO)));
        let mut m = comps(0.9, 0.9, 0.9);
        m.insert(Species::NO2, 0.5);
        assert_eq!(compute_composite_index(&m, None), Err(IndexError::UnexpectedComponent(Species::NO2)));
        assert!(matches!(
            compute_composite_index(&comps(1.2, 0.9, 0.9), None),
            Err(IndexError::ComponentOutOfRange { species: Species::CO, .. })
        ));
    }

    #[test]
    fn composite_custom_weights() {
        let w = BTreeMap::from([(Species::CO, 0.5), (Species::SO2, 0.25), (Species::O3, 0.25)]);
        let v = compute_composite_index(&comps(0.64, 0.81, 0.25), Some(&w)).unwrap();
        // 0.8 * 0.81^0.25 * 0.25^0.25 = 0.8 * 0.9486833 * 0.7071068
        assert!(rel_eq(v, 0.8 * 0.81f64.powf(0.25) * 0.25f64.powf(0.25), 1e-12));

        let bad = BTreeMap::from([(Species::CO, 0.5), (Species::SO2, 0.5), (Species::O3, 0.5)]);
        assert!(matches!(
            compute_composite_index(&comps(0.5, 0.5, 0.5), Some(&bad)),
            Err(IndexError::InvalidWeights(_))
        ));
        let partial = BTreeMap::from([(Species::CO, 0.5), (Species::SO2, 0.5)]);
        assert!(matches!(
            compute_composite_index(&comps(0.5, 0.5, 0.5), Some(&partial)),
            Err(IndexError::InvalidWeights(_))
        ));
    }

    #[test]
    fn band_examples() {
        assert_eq!(classify_band(0.934).unwrap(), SimilarityBand::VeryHigh);
        assert_eq!(classify_band(0.8).unwrap(), SimilarityBand::VeryHigh);
        assert_eq!(classify_band(0.0).unwrap(), SimilarityBand::VeryLow);
        assert_eq!(classify_band(1.0).unwrap(), SimilarityBand::VeryHigh);
        assert_eq!(classify_band(0.2).unwrap(), SimilarityBand::Low);
        assert_eq!(classify_band(0.599_999).unwrap(), SimilarityBand::Moderate);
        assert!(classify_band(1.000_001).is_err());
        assert!(classify_band(-0.1).is_err());
        assert!(classify_band(f64::NAN).is_err());
    }

    #[test]
    fn bracket_validation_examples() {
        assert_eq!(validate_reference_bracket(limits(30.0, 180.0), 80.0), BracketReport::Bracketed);
        match validate_reference_bracket(limits(95.0, 260.0), 80.0) {
            BracketReport::Violation(v) => {
                assert_eq!(v.side, BracketSide::Lower);
                assert_eq!(v.limit, 95.0);
                assert_eq!(v.margin(), 15.0);
            }
            r => panic!("{r:?}"),
        }
        match validate_reference_bracket(limits(10.0, 80.0), 80.0) {
            BracketReport::Violation(v) => assert_eq!(v.side, BracketSide::Upper),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn composite_index_struct_sorts_and_bands() {
        let comps = vec![
            GasIndex::new(Species::O3, 0.922).unwrap(),
            GasIndex::new(Species::CO, 0.983).unwrap(),
            GasIndex::new(Species::SO2, 0.901).unwrap(),
        ];
        let c = CompositeIndex::from_components("Delhi", 2011, comps, None).unwrap();
        assert_eq!(c.band, SimilarityBand::VeryHigh);
        assert_eq!(c.components[0].species, Species::O3);
        assert!(rel_eq(c.value, (0.983f64 * 0.901 * 0.922).cbrt(), 1e-12));
    }
}
