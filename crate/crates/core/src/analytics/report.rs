use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::index::{
    compute_gas_index, compute_weight_exponents, validate_reference_bracket, BracketReport, BracketViolation,
    CompositeIndex, GasIndex, IndexError, LimitPair, ReferenceStandard, WeightExponents,
};
use crate::ingest::AnnualAggregate;
use crate::species::Species;

/// Composite deviations above this are flagged against expected values.
pub const DEFAULT_DISCREPANCY_TOLERANCE: f64 = 0.002;

pub const DSI_TABLE_HEADER: &str = "year,city,co,so2,o3,composite,band";

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub city_label: String,
    /// Include below-coverage annual means.
    pub force: bool,
    /// Exponents that take precedence over derived ones.
    pub external_exponents: BTreeMap<Species, f64>,
    pub composite_weights: Option<BTreeMap<Species, f64>>,
    /// Known composite values per year to audit against.
    pub expected_composites: BTreeMap<i32, f64>,
    pub discrepancy_tolerance: f64,
}

impl ReportOptions {
    pub fn new(city_label: impl Into<String>) -> Self {
        Self {
            city_label: city_label.into(),
            force: false,
            external_exponents: BTreeMap::new(),
            composite_weights: None,
            expected_composites: BTreeMap::new(),
            discrepancy_tolerance: DEFAULT_DISCREPANCY_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentSource {
    External,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRecord {
    pub species: Species,
    pub source: ExponentSource,
    pub x0: f64,
    pub w_a: f64,
    pub w_b: f64,
    pub w_x: f64,
}

/// Why a species was or was not admitted to the index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ValidationOutcome {
    Bracketed {
        lower: f64,
        upper: f64,
        x0: f64,
    },
    NotBracketed {
        violation: BracketViolation,
        lower: f64,
        upper: f64,
    },
    /// No observation limits available; only an external exponent can admit it.
    NoLimits,
    DegenerateLimit {
        message: String,
    },
    MissingStandard,
    NoExponent,
    /// Not an index gas (particulates).
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesValidation {
    pub species: Species,
    pub included: bool,
    #[serde(flatten)]
    pub outcome: ValidationOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearGasIndices {
    pub year: i32,
    pub indices: Vec<GasIndex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearError {
    pub year: i32,
    pub code: String,
    pub message: String,
    pub missing: Vec<Species>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub year: i32,
    pub expected: f64,
    pub computed: f64,
    pub deviation: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityReport {
    pub city_label: String,
    pub threshold: f64,
    pub years: Vec<CompositeIndex>,
    pub per_gas: Vec<YearGasIndices>,
    pub exponents: Vec<ExponentRecord>,
    pub validations: Vec<SpeciesValidation>,
    pub year_errors: Vec<YearError>,
    pub discrepancies: Vec<Discrepancy>,
    pub notes: Vec<String>,
}

impl CityReport {
    /// Species dropped because their limits do not bracket the reference.
    pub fn bracket_exclusions(&self) -> impl Iterator<Item = &SpeciesValidation> {
        self.validations.iter().filter(|v| matches!(v.outcome, ValidationOutcome::NotBracketed { .. }))
    }

    pub fn flagged_discrepancies(&self) -> impl Iterator<Item = &Discrepancy> {
        self.discrepancies.iter().filter(|d| d.flagged)
    }

    pub fn composite(&self, year: i32) -> Option<&CompositeIndex> {
        self.years.iter().find(|c| c.year == year)
    }
}

struct Admitted {
    x0: f64,
    w_x: f64,
}

/// Assembles per-gas and composite indices for every year present in
/// `aggregates`. Years that cannot produce a composite are reported in
/// `year_errors` rather than failing the whole report.
pub fn build_city_report(
    aggregates: &[AnnualAggregate],
    standards: &[ReferenceStandard],
    limits: &BTreeMap<Species, LimitPair>,
    v: f64,
    options: &ReportOptions,
) -> Result<CityReport, AnalyticsError> {
    if !(v > 0.0 && v < 1.0) {
        return Err(IndexError::InvalidThreshold(v).into());
    }
    if aggregates.is_empty() {
        return Err(AnalyticsError::NoData(format!("no annual aggregates for {}", options.city_label)));
    }

    let mut notes = Vec::new();
    let species: BTreeSet<Species> = aggregates.iter().map(|a| a.species).collect();
    let mut validations = Vec::new();
    let mut exponents = Vec::new();
    let mut admitted: BTreeMap<Species, Admitted> = BTreeMap::new();

    for &sp in &species {
        let (outcome, exps) = admit_species(sp, standards, limits, v, options)?;
        let included = exps.is_some();
        if let Some((source, x0, w)) = exps {
            exponents.push(ExponentRecord {
                species: sp,
                source,
                x0,
                w_a: w.lower(),
                w_b: w.upper(),
                w_x: w.combined(),
            });
            admitted.insert(sp, Admitted { x0, w_x: w.combined() });
        }
        if let ValidationOutcome::NotBracketed { violation, .. } = &outcome {
            notes.push(format!("{sp} excluded: {violation}"));
        }
        validations.push(SpeciesValidation { species: sp, included, outcome });
    }

    // (year, species) -> station aggregates
    let mut grouped: BTreeMap<i32, BTreeMap<Species, Vec<&AnnualAggregate>>> = BTreeMap::new();
    for a in aggregates {
        grouped.entry(a.year).or_default().entry(a.species).or_default().push(a);
    }

    let mut years = Vec::new();
    let mut per_gas = Vec::new();
    let mut year_errors = Vec::new();
    for (&year, by_species) in &grouped {
        let mut indices = Vec::new();
        for (sp, aggs) in by_species {
            let Some(adm) = admitted.get(sp) else { continue };
            let usable: Vec<&&AnnualAggregate> = aggs.iter().filter(|a| options.force || !a.below_coverage).collect();
            if usable.len() < aggs.len() {
                let skipped: Vec<String> = aggs
                    .iter()
                    .filter(|a| a.below_coverage)
                    .map(|a| format!("{} ({:.1}%)", a.station_id, 100.0 * a.coverage))
                    .collect();
                notes.push(format!("{year} {sp}: below coverage, excluded: {}", skipped.join(", ")));
            } else if options.force && aggs.iter().any(|a| a.below_coverage) {
                notes.push(format!("{year} {sp}: below-coverage data included (forced)"));
            }
            if usable.is_empty() {
                continue;
            }
            if usable.len() > 1 {
                notes.push(format!("{year} {sp}: mean of {} station annual means", usable.len()));
            }
            let x = usable.iter().map(|a| a.mean).sum::<f64>() / usable.len() as f64;
            let value = compute_gas_index(x, adm.x0, adm.w_x)?;
            indices.push(GasIndex::new(*sp, value)?);
        }

        let composite: Vec<GasIndex> = indices.iter().filter(|g| g.species.is_composite_component()).cloned().collect();
        let missing: Vec<Species> =
            Species::COMPOSITE.into_iter().filter(|s| !composite.iter().any(|g| g.species == *s)).collect();
        if missing.is_empty() {
            years.push(CompositeIndex::from_components(
                options.city_label.clone(),
                year,
                composite,
                options.composite_weights.as_ref(),
            )?);
        } else {
            let names: Vec<&str> = missing.iter().map(|s| s.as_str()).collect();
            year_errors.push(YearError {
                year,
                code: "InsufficientSpecies".into(),
                message: format!("{year}: no usable index for {}", names.join(", ")),
                missing,
            });
        }
        per_gas.push(YearGasIndices { year, indices });
    }

    let mut discrepancies = Vec::new();
    for (&year, &expected) in &options.expected_composites {
        let Some(c) = years.iter().find(|c| c.year == year) else { continue };
        let deviation = (expected - c.value).abs();
        let flagged = deviation > options.discrepancy_tolerance;
        if flagged {
            notes.push(format!(
                "{year}: composite {:.3} deviates from expected {expected:.3} by {deviation:.3}",
                c.value
            ));
        }
        discrepancies.push(Discrepancy { year, expected, computed: c.value, deviation, flagged });
    }

    Ok(CityReport {
        city_label: options.city_label.clone(),
        threshold: v,
        years,
        per_gas,
        exponents,
        validations,
        year_errors,
        discrepancies,
        notes,
    })
}

type Admission = (ValidationOutcome, Option<(ExponentSource, f64, WeightExponents)>);

fn admit_species(
    sp: Species,
    standards: &[ReferenceStandard],
    limits: &BTreeMap<Species, LimitPair>,
    v: f64,
    options: &ReportOptions,
) -> Result<Admission, AnalyticsError> {
    if sp == Species::PM25 {
        return Ok((ValidationOutcome::NotApplicable, None));
    }
    let Some(standard) = standards.iter().find(|s| s.species == sp) else {
        return Ok((ValidationOutcome::MissingStandard, None));
    };
    let x0 = standard.x0;
    let external = options.external_exponents.get(&sp).copied();

    let Some(lim) = limits.get(&sp).copied() else {
        return Ok(match external {
            Some(w) => {
                (ValidationOutcome::NoLimits, Some((ExponentSource::External, x0, WeightExponents::external(w)?)))
            }
            None => (ValidationOutcome::NoExponent, None),
        });
    };
    let (lower, upper) = (lim.lower(), lim.upper());
    if let BracketReport::Violation(violation) = validate_reference_bracket(lim, x0) {
        return Ok((ValidationOutcome::NotBracketed { violation, lower, upper }, None));
    }
    let bracketed = ValidationOutcome::Bracketed { lower, upper, x0 };
    if let Some(w) = external {
        return Ok((bracketed, Some((ExponentSource::External, x0, WeightExponents::external(w)?))));
    }
    match compute_weight_exponents(x0, lim, v) {
        Ok(w) => Ok((bracketed, Some((ExponentSource::Derived, x0, w)))),
        Err(IndexError::DegenerateLimit(message)) => Ok((ValidationOutcome::DegenerateLimit { message }, None)),
        Err(e) => Err(e.into()),
    }
}

/// Serialises reports as pretty-printed JSON.
pub fn write_report_json<W: Write, T: Serialize>(report: &T, mut out: W) -> Result<(), AnalyticsError> {
    serde_json::to_writer_pretty(&mut out, report).map_err(|e| AnalyticsError::Serialize(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Writes one row per composite year in the per-gas/composite table layout,
/// values at three decimals.
pub fn write_dsi_table<W: Write>(reports: &[CityReport], mut out: W) -> Result<(), AnalyticsError> {
    writeln!(out, "{DSI_TABLE_HEADER}")?;
    for report in reports {
        for c in &report.years {
            let gas = |s: Species| c.components.iter().find(|g| g.species == s).map_or(f64::NAN, |g| g.value);
            writeln!(
                out,
                "{},{},{:.3},{:.3},{:.3},{:.3},{}",
                c.year,
                report.city_label,
                gas(Species::CO),
                gas(Species::SO2),
                gas(Species::O3),
                c.value,
                c.band
            )?;
        }
    }
    out.flush()?;
    Ok(())
}
