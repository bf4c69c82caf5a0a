use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::units::{normalize_unit_with, Unit, DEFAULT_MOLAR_VOLUME};
use super::{IngestError, Observation, ObservationSeries};
use crate::species::Species;

/// Layout of a daily observation file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatProfile {
    /// CSV with a `date,value[,unit]` header and ISO dates.
    Generic,
    /// CSV as exported by CPCB: also accepts `DD-MM-YYYY` dates (with an
    /// optional trailing time), a `From Date` column and a value column
    /// named after the species.
    Cpcb,
    /// Whitespace-delimited records; lines starting with `#` or `C` are
    /// comments. A `# unit: ppb` comment sets the file unit.
    Wdcgg,
}

impl FromStr for FormatProfile {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "generic" => Ok(FormatProfile::Generic),
            "cpcb" => Ok(FormatProfile::Cpcb),
            "wdcgg" => Ok(FormatProfile::Wdcgg),
            _ => Err(IngestError::UnknownProfile(s.to_string())),
        }
    }
}

impl fmt::Display for FormatProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormatProfile::Generic => "generic",
            FormatProfile::Cpcb => "cpcb",
            FormatProfile::Wdcgg => "wdcgg",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub profile: FormatProfile,
    pub station_id: String,
    pub species: Species,
    /// Unit assumed when a row or file does not state one.
    pub default_unit: Unit,
    pub molar_volume: f64,
}

impl ParseOptions {
    pub fn new(profile: FormatProfile, station_id: impl Into<String>, species: Species) -> Self {
        Self {
            profile,
            station_id: station_id.into(),
            species,
            default_unit: Unit::UgM3,
            molar_volume: DEFAULT_MOLAR_VOLUME,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    MalformedRow,
    MalformedDate,
    MissingValue,
    MalformedValue,
    NonFiniteValue,
    NegativeSentinel,
    UnknownUnit,
    UnsupportedConversion,
    DuplicateDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    /// 1-based line number in the source.
    pub line: u64,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    /// Data rows seen (header and comment lines excluded).
    pub total_rows: usize,
    pub stored_rows: usize,
    pub skipped: Vec<SkippedRow>,
}

impl ParseReport {
    pub fn count(&self, reason: SkipReason) -> usize {
        self.skipped.iter().filter(|s| s.reason == reason).count()
    }
}

/// Parses a daily observation file with the default unit (µg/m³) and molar
/// volume.
pub fn parse_daily_csv<R: Read>(
    input: R,
    profile: FormatProfile,
    station_id: &str,
    species: Species,
) -> Result<(ObservationSeries, ParseReport), IngestError> {
    parse_daily_csv_with(input, &ParseOptions::new(profile, station_id, species))
}

struct RawRow<'a> {
    line: u64,
    date: &'a str,
    value: &'a str,
    unit: Option<&'a str>,
}

pub fn parse_daily_csv_with<R: Read>(
    mut input: R,
    opts: &ParseOptions,
) -> Result<(ObservationSeries, ParseReport), IngestError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|e| IngestError::UnreadableInput(format!("not UTF-8: {e}")))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);

    let mut builder = Builder::new(opts);
    match opts.profile {
        FormatProfile::Generic | FormatProfile::Cpcb => parse_csv(text, opts, &mut builder)?,
        FormatProfile::Wdcgg => parse_whitespace(text, &mut builder),
    }
    builder.finish()
}

fn parse_csv(text: &str, opts: &ParseOptions, builder: &mut Builder<'_>) -> Result<(), IngestError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IngestError::UnreadableInput(e.to_string()))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect::<Vec<_>>();

    let find = |names: &[&str]| headers.iter().position(|h| names.contains(&h.as_str()));
    let (date_col, value_col) = match opts.profile {
        FormatProfile::Cpcb => (
            find(&["date", "from date", "from_date"]),
            find(&["value"]).or_else(|| headers.iter().position(|h| h.parse::<Species>() == Ok(opts.species))),
        ),
        _ => (find(&["date"]), find(&["value"])),
    };
    let (Some(date_col), Some(value_col)) = (date_col, value_col) else {
        return Err(IngestError::UnreadableInput(format!("header lacks date/value columns: {headers:?}")));
    };
    let unit_col = find(&["unit"]);

    for record in reader.records() {
        let record = record.map_err(|e| IngestError::UnreadableInput(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        match (record.get(date_col), record.get(value_col)) {
            (Some(date), Some(value)) => {
                builder.push(RawRow { line, date, value, unit: unit_col.and_then(|c| record.get(c)) })
            }
            _ => builder.skip(line, SkipReason::MalformedRow),
        }
    }
    Ok(())
}

fn parse_whitespace(text: &str, builder: &mut Builder<'_>) {
    for (idx, raw) in text.lines().enumerate() {
        let line = idx as u64 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') || trimmed.starts_with('C') {
            let body = trimmed.trim_start_matches(['#', 'C']).trim();
            if let Some(rest) = body.strip_prefix("unit:") {
                if let Ok(unit) = rest.trim().parse::<Unit>() {
                    builder.file_unit = unit;
                }
            }
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() >= 4 && tokens[..3].iter().all(|t| t.chars().all(|c| c.is_ascii_digit())) {
            builder.push_ymd(line, &tokens);
        } else if tokens.len() >= 2 {
            builder.push(RawRow { line, date: tokens[0], value: tokens[1], unit: tokens.get(2).copied() });
        } else {
            builder.skip(line, SkipReason::MalformedRow);
        }
    }
}

struct Builder<'a> {
    opts: &'a ParseOptions,
    file_unit: Unit,
    first_unit: Option<Unit>,
    seen: HashSet<NaiveDate>,
    records: Vec<Observation>,
    report: ParseReport,
}

impl<'a> Builder<'a> {
    fn new(opts: &'a ParseOptions) -> Self {
        Self {
            opts,
            file_unit: opts.default_unit,
            first_unit: None,
            seen: HashSet::new(),
            records: Vec::new(),
            report: ParseReport::default(),
        }
    }

    fn skip(&mut self, line: u64, reason: SkipReason) {
        self.report.total_rows += 1;
        self.report.skipped.push(SkippedRow { line, reason });
    }

    fn push_ymd(&mut self, line: u64, tokens: &[&str]) {
        let date = format!("{}-{}-{}", tokens[0], tokens[1], tokens[2]);
        self.push(RawRow { line, date: &date, value: tokens[3], unit: tokens.get(4).copied() });
    }

    fn push(&mut self, row: RawRow<'_>) {
        match self.convert(&row) {
            Ok((date, value, unit)) => {
                if !self.seen.insert(date) {
                    self.skip(row.line, SkipReason::DuplicateDate);
                    return;
                }
                self.first_unit.get_or_insert(unit);
                self.report.total_rows += 1;
                self.report.stored_rows += 1;
                self.records.push(Observation { date, value });
            }
            Err(reason) => self.skip(row.line, reason),
        }
    }

    fn convert(&self, row: &RawRow<'_>) -> Result<(NaiveDate, f64, Unit), SkipReason> {
        let date = parse_date(row.date, self.opts.profile).ok_or(SkipReason::MalformedDate)?;
        let value = parse_value(row.value)?;
        let unit = match row.unit.filter(|u| !u.trim().is_empty()) {
            Some(u) => u.parse::<Unit>().map_err(|_| SkipReason::UnknownUnit)?,
            None => self.file_unit,
        };
        let value = normalize_unit_with(value, unit, self.opts.species, self.opts.molar_volume)
            .map_err(|_| SkipReason::UnsupportedConversion)?;
        Ok((date, value, unit))
    }

    fn finish(mut self) -> Result<(ObservationSeries, ParseReport), IngestError> {
        if self.records.is_empty() {
            return Err(IngestError::UnreadableInput(format!(
                "no parsable rows ({} data rows, all skipped)",
                self.report.total_rows
            )));
        }
        self.records.sort_by_key(|o| o.date);
        let series = ObservationSeries::new(
            self.opts.station_id.clone(),
            self.opts.species,
            self.first_unit.unwrap_or(self.file_unit),
            self.records,
        )?;
        Ok((series, self.report))
    }
}

fn parse_date(raw: &str, profile: FormatProfile) -> Option<NaiveDate> {
    let raw = raw.trim();
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Some(d);
    }
    match profile {
        FormatProfile::Generic => None,
        FormatProfile::Cpcb | FormatProfile::Wdcgg => {
            let day = raw.split_whitespace().next()?;
            ["%Y-%m-%d", "%d-%m-%Y", "%d/%m/%Y"].iter().find_map(|f| NaiveDate::parse_from_str(day, f).ok())
        }
    }
}

fn parse_value(raw: &str) -> Result<f64, SkipReason> {
    let raw = raw.trim();
    if raw.is_empty() || ["none", "na", "n/a", "nan", "null", "-"].contains(&raw.to_ascii_lowercase().as_str()) {
        return Err(SkipReason::MissingValue);
    }
    let value: f64 = raw.parse().map_err(|_| SkipReason::MalformedValue)?;
    if !value.is_finite() {
        Err(SkipReason::NonFiniteValue)
    } else if value < 0.0 {
        Err(SkipReason::NegativeSentinel)
    } else {
        Ok(value)
    }
}

/// Writes a series in the generic profile: `date,value`, LF line endings,
/// values in µg/m³ with shortest round-trip formatting.
pub fn write_generic_csv<W: Write>(series: &ObservationSeries, mut out: W) -> std::io::Result<()> {
    writeln!(out, "date,value")?;
    for o in series.records() {
        writeln!(out, "{},{}", o.date.format("%Y-%m-%d"), o.value)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic(text: &str) -> Result<(ObservationSeries, ParseReport), IngestError> {
        parse_daily_csv(text.as_bytes(), FormatProfile::Generic, "st", Species::O3)
    }

    #[test]
    fn minimal_generic() {
        let (s, r) = generic("date,value\n2011-01-01,10\n2011-01-02,20\n2011-01-03,30\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.records().iter().map(|o| o.value).collect::<Vec<_>>(), vec![10.0, 20.0, 30.0]);
        assert_eq!(r.total_rows, 3);
        assert!(r.skipped.is_empty());
    }

    #[test]
    fn impossible_date_is_skipped() {
        let (s, r) = generic("date,value\n2013-02-28,10\n2013-02-30,15\n2013-03-01,30\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(r.count(SkipReason::MalformedDate), 1);
        assert_eq!(r.skipped[0].line, 3);
    }

    #[test]
    fn duplicate_date_keeps_first() {
        let (s, r) = generic("date,value\n2011-01-01,10\n2011-01-02,20\n2011-01-01,99\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.records()[0].value, 10.0);
        assert_eq!(r.count(SkipReason::DuplicateDate), 1);
        assert_eq!(r.skipped[0].line, 4);
    }

    #[test]
    fn sentinels_are_counted() {
        let text =
            "date,value\n2011-01-01,\n2011-01-02,None\n2011-01-03,-999\n2011-01-04,abc\n2011-01-05,inf\n2011-01-06,5\n";
        let (s, r) = generic(text).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(r.count(SkipReason::MissingValue), 2);
        assert_eq!(r.count(SkipReason::NegativeSentinel), 1);
        assert_eq!(r.count(SkipReason::MalformedValue), 1);
        assert_eq!(r.count(SkipReason::NonFiniteValue), 1);
        assert_eq!(r.total_rows, r.stored_rows + r.skipped.len());
    }

    #[test]
    fn output_is_sorted() {
        let (s, _) = generic("date,value\n2011-01-03,3\n2011-01-01,1\n2011-01-02,2\n").unwrap();
        let dates: Vec<_> = s.records().iter().map(|o| o.date.to_string()).collect();
        assert_eq!(dates, ["2011-01-01", "2011-01-02", "2011-01-03"]);
    }

    #[test]
    fn crlf_and_unit_column() {
        let text = "date,value,unit\r\n2011-01-01,2,mg_m3\r\n2011-01-02,1500,\r\n";
        let (s, _) = parse_daily_csv(text.as_bytes(), FormatProfile::Generic, "st", Species::CO).unwrap();
        assert_eq!(s.records()[0].value, 2000.0);
        assert_eq!(s.records()[1].value, 1500.0);
        assert_eq!(s.unit_of_record, Unit::MgM3);
    }

    #[test]
    fn generic_rejects_dmy_dates() {
        let text = "date,value\n01-02-2011,5\n2011-02-02,6\n";
        let (s, r) = generic(text).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(r.count(SkipReason::MalformedDate), 1);
    }

    #[test]
    fn cpcb_profile() {
        let text = "From Date,To Date,PM2.5,unit\n01-01-2017 00:00,02-01-2017 00:00,120.5,ug/m3\n02-01-2017 00:00,03-01-2017 00:00,None,\n2017-01-03,2017-01-04,80,\n";
        let (s, r) = parse_daily_csv(text.as_bytes(), FormatProfile::Cpcb, "peenya", Species::PM25).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.records()[0].date, NaiveDate::from_ymd_opt(2017, 1, 1).unwrap());
        assert_eq!(s.records()[0].value, 120.5);
        assert_eq!(r.count(SkipReason::MissingValue), 1);
    }

    #[test]
    fn wdcgg_profile() {
        let text =
            "# site: JFJ\n# unit: ppb\nC comment\n2011 01 01 100\n2011-01-02 50 ug_m3\n\n2011 01 03 -999.999\nbad\n";
        let (s, r) = parse_daily_csv(text.as_bytes(), FormatProfile::Wdcgg, "jfj", Species::CO).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.records()[0].value - 100.0 * 28.01 / 24.45).abs() < 1e-9);
        assert_eq!(s.records()[1].value, 50.0);
        assert_eq!(s.unit_of_record, Unit::Ppb);
        assert_eq!(r.count(SkipReason::NegativeSentinel), 1);
        assert_eq!(r.count(SkipReason::MalformedRow), 1);
        assert_eq!(r.total_rows, 4);
    }

    #[test]
    fn unreadable_inputs() {
        assert!(matches!(generic("date,value\n"), Err(IngestError::UnreadableInput(_))));
        assert!(matches!(generic("when,what\n2011-01-01,1\n"), Err(IngestError::UnreadableInput(_))));
        assert!(matches!(
            parse_daily_csv(&[0xff, 0xfe, 0x00][..], FormatProfile::Generic, "s", Species::CO),
            Err(IngestError::UnreadableInput(_))
        ));
        assert!(matches!("xml".parse::<FormatProfile>(), Err(IngestError::UnknownProfile(_))));
    }

    #[test]
    fn ppb_for_particulates_is_skipped() {
        let text = "date,value,unit\n2017-01-01,5,ppb\n2017-01-02,6,ug_m3\n";
        let (s, r) = parse_daily_csv(text.as_bytes(), FormatProfile::Generic, "s", Species::PM25).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(r.count(SkipReason::UnsupportedConversion), 1);
    }

    #[test]
    fn writes_generic() {
        let (s, _) = generic("date,value\n2011-01-01,10.25\n2011-01-02,0.1\n").unwrap();
        let mut buf = Vec::new();
        write_generic_csv(&s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "date,value\n2011-01-01,10.25\n2011-01-02,0.1\n");
    }
}
