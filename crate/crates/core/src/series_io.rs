//! Raw dataset ingestion: CSV loading, gap filling, resampling onto a uniform
//! grid and the train/holdout split.
//!
//! The four source datasets this toolkit was built around all use different
//! CSV conventions (split date and time columns, decimal commas, a `?`
//! missing token, half-hour "period" indices), so [`CsvSchema`] describes
//! each file rather than assuming one layout.

use std::fmt;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timestamp format used for every file this crate writes.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn format_timestamp(t: NaiveDateTime) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

pub fn parse_timestamp(s: &str) -> Result<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s.trim(), TIMESTAMP_FORMAT)
        .or_else(|_| {
            NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
                .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight is valid"))
        })
        .map_err(|e| Error::InvalidArgument(format!("bad timestamp {s:?}: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerUnit {
    W,
    #[serde(rename = "kW")]
    KW,
    MW,
}

impl fmt::Display for PowerUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PowerUnit::W => "W",
            PowerUnit::KW => "kW",
            PowerUnit::MW => "MW",
        })
    }
}

/// Column mapping for one source file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_decimal")]
    pub decimal: char,
    #[serde(default)]
    pub missing: Option<String>,
    /// Header names whose values are joined with a single space and parsed
    /// with `time_format`.
    pub time_columns: Vec<String>,
    pub time_format: String,
    pub value_column: String,
    /// 1-based intra-day period index; when set, `time_format` parses a date
    /// and the timestamp is `date + (period - 1) * period_minutes`.
    #[serde(default)]
    pub period_column: Option<String>,
    #[serde(default)]
    pub period_minutes: Option<u32>,
}

fn default_delimiter() -> char {
    ','
}

fn default_decimal() -> char {
    '.'
}

impl CsvSchema {
    pub fn new(time_columns: &[&str], time_format: &str, value_column: &str) -> Self {
        CsvSchema {
            delimiter: ',',
            decimal: '.',
            missing: None,
            time_columns: time_columns.iter().map(|s| s.to_string()).collect(),
            time_format: time_format.to_string(),
            value_column: value_column.to_string(),
            period_column: None,
            period_minutes: None,
        }
    }

    pub fn delimiter(mut self, delimiter: char) -> Self {
        self.delimiter = delimiter;
        self
    }

    pub fn decimal(mut self, decimal: char) -> Self {
        self.decimal = decimal;
        self
    }

    pub fn missing(mut self, token: &str) -> Self {
        self.missing = Some(token.to_string());
        self
    }

    pub fn period(mut self, column: &str, minutes: u32) -> Self {
        self.period_column = Some(column.to_string());
        self.period_minutes = Some(minutes);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRow {
    pub timestamp: NaiveDateTime,
    /// `None` marks a missing reading.
    pub value: Option<f64>,
}

impl RawRow {
    pub fn is_missing(&self) -> bool {
        self.value.is_none()
    }
}

/// Rows exactly as read from a source file, possibly with gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecords {
    source_id: String,
    unit: PowerUnit,
    rows: Vec<RawRow>,
}

impl RawRecords {
    /// Fails if timestamps are not strictly increasing or a present value is
    /// not finite.
    pub fn new(source_id: impl Into<String>, unit: PowerUnit, rows: Vec<RawRow>) -> Result<Self> {
        for (i, w) in rows.windows(2).enumerate() {
            if w[1].timestamp <= w[0].timestamp {
                return Err(Error::NonMonotonic { line: i as u64 + 2 });
            }
        }
        if let Some(i) = rows
            .iter()
            .position(|r| r.value.is_some_and(|v| !v.is_finite()))
        {
            return Err(Error::NonFinite(format!("row {i}")));
        }
        Ok(RawRecords {
            source_id: source_id.into(),
            unit,
            rows,
        })
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn unit(&self) -> PowerUnit {
        self.unit
    }

    pub fn rows(&self) -> &[RawRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_missing()).count()
    }

    /// Smallest positive spacing between consecutive rows.
    pub fn native_step(&self) -> Option<Duration> {
        self.rows
            .windows(2)
            .map(|w| w[1].timestamp - w[0].timestamp)
            .min()
    }
}

/// Reads a source file. See [`parse_csv`].
pub fn load_csv(
    path: impl AsRef<Path>,
    schema: &CsvSchema,
    source_id: &str,
    unit: PowerUnit,
) -> Result<RawRecords> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(io::BufReader::new(file), schema, source_id, unit)
}

/// Parses CSV text with a header row into [`RawRecords`], one row per data
/// line in file order.
pub fn parse_csv<R: Read>(
    reader: R,
    schema: &CsvSchema,
    source_id: &str,
    unit: PowerUnit,
) -> Result<RawRecords> {
    if !schema.delimiter.is_ascii() {
        return Err(Error::Schema(format!(
            "delimiter {:?} is not ASCII",
            schema.delimiter
        )));
    }
    if schema.time_columns.is_empty() {
        return Err(Error::Schema("no time columns given".into()));
    }
    if schema.period_column.is_some() != schema.period_minutes.is_some() {
        return Err(Error::Schema(
            "period_column and period_minutes must be given together".into(),
        ));
    }

    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("column {name:?} not found in header")))
    };
    let time_idx = schema
        .time_columns
        .iter()
        .map(|c| col(c))
        .collect::<Result<Vec<_>>>()?;
    let value_idx = col(&schema.value_column)?;
    let period_idx = schema.period_column.as_deref().map(col).transpose()?;

    let mut rows = Vec::new();
    let mut joined = String::new();
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<&str> {
            record.get(i).map(str::trim).ok_or_else(|| Error::Row {
                line,
                message: format!("missing field {i}"),
            })
        };

        joined.clear();
        for (n, &i) in time_idx.iter().enumerate() {
            if n > 0 {
                joined.push(' ');
            }
            joined.push_str(field(i)?);
        }
        let timestamp = match (period_idx, schema.period_minutes) {
            (Some(pi), Some(minutes)) => {
                let date = NaiveDate::parse_from_str(&joined, &schema.time_format).map_err(|e| {
                    Error::Row {
                        line,
                        message: format!("unparseable date {joined:?}: {e}"),
                    }
                })?;
                let period: i64 = field(pi)?.parse().map_err(|_| Error::Row {
                    line,
                    message: format!("unparseable period {:?}", record.get(pi)),
                })?;
                if period < 1 {
                    return Err(Error::Row {
                        line,
                        message: format!("period index {period} < 1"),
                    });
                }
                date.and_hms_opt(0, 0, 0).expect("midnight is valid")
                    + Duration::minutes((period - 1) * i64::from(minutes))
            }
            _ => parse_datetime(&joined, &schema.time_format).ok_or_else(|| Error::Row {
                line,
                message: format!("unparseable timestamp {joined:?}"),
            })?,
        };

        let raw = field(value_idx)?;
        let value = if schema.missing.as_deref() == Some(raw) {
            None
        } else {
            Some(parse_number(raw, schema.decimal).ok_or_else(|| Error::Row {
                line,
                message: format!("unparseable value {raw:?}"),
            })?)
        };

        if let Some(prev) = rows.last().map(|r: &RawRow| r.timestamp) {
            if timestamp <= prev {
                return Err(Error::NonMonotonic { line });
            }
        }
        rows.push(RawRow { timestamp, value });
    }
    RawRecords::new(source_id, unit, rows)
}

fn parse_datetime(s: &str, format: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s, format).ok().or_else(|| {
        NaiveDate::parse_from_str(s, format)
            .ok()
            .and_then(|d| d.and_hms_opt(0, 0, 0))
    })
}

fn parse_number(s: &str, decimal: char) -> Option<f64> {
    let v: f64 = if decimal == '.' {
        s.parse().ok()?
    } else {
        s.replace(decimal, ".").parse().ok()?
    };
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapPolicy {
    /// Replace each missing value with the most recent present value.
    #[default]
    ForwardFill,
}

/// Fills gaps according to `policy`, returning the cleaned records and the
/// number of values filled.
pub fn clean(raw: &RawRecords, policy: GapPolicy) -> Result<(RawRecords, usize)> {
    if raw.is_empty() {
        return Err(Error::InvalidArgument("cannot clean empty records".into()));
    }
    let mut fills = 0;
    let mut last = None;
    let mut rows = Vec::with_capacity(raw.len());
    for (index, row) in raw.rows.iter().enumerate() {
        let value = match (row.value, policy) {
            (Some(v), _) => v,
            (None, GapPolicy::ForwardFill) => {
                fills += 1;
                last.ok_or(Error::NoFillSource { index })?
            }
        };
        last = Some(value);
        rows.push(RawRow {
            timestamp: row.timestamp,
            value: Some(value),
        });
    }
    let cleaned = RawRecords {
        source_id: raw.source_id.clone(),
        unit: raw.unit,
        rows,
    };
    Ok((cleaned, fills))
}

/// A gap-free, uniformly sampled univariate series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    start: NaiveDateTime,
    interval_secs: i64,
    values: Vec<f64>,
    unit: PowerUnit,
}

impl TimeSeries {
    pub fn new(
        start: NaiveDateTime,
        interval: Duration,
        values: Vec<f64>,
        unit: PowerUnit,
    ) -> Result<Self> {
        let interval_secs = interval.num_seconds();
        if interval_secs <= 0 {
            return Err(Error::Interval(format!(
                "interval must be positive, got {interval_secs}s"
            )));
        }
        if values.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a series needs at least 2 points, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("series value at index {i}")));
        }
        Ok(TimeSeries {
            start,
            interval_secs,
            values,
            unit,
        })
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn interval(&self) -> Duration {
        Duration::seconds(self.interval_secs)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> PowerUnit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, index: usize) -> NaiveDateTime {
        self.start + Duration::seconds(self.interval_secs * index as i64)
    }

    /// Timestamp of the last point.
    pub fn end(&self) -> NaiveDateTime {
        self.timestamp(self.len() - 1)
    }

    /// Index of the first point at or after `t`.
    pub fn index_at_or_after(&self, t: NaiveDateTime) -> usize {
        let secs = (t - self.start).num_seconds();
        if secs <= 0 {
            return 0;
        }
        let idx = (secs + self.interval_secs - 1) / self.interval_secs;
        (idx as usize).min(self.len())
    }

    /// Appends `other`, which must start exactly one interval after `self`
    /// ends.
    pub fn concat(&self, other: &TimeSeries) -> Result<TimeSeries> {
        if other.interval_secs != self.interval_secs || other.unit != self.unit {
            return Err(Error::InvalidArgument(
                "cannot concatenate series with different interval or unit".into(),
            ));
        }
        if other.start != self.end() + self.interval() {
            return Err(Error::InvalidArgument(format!(
                "series are not contiguous: {} then {}",
                format_timestamp(self.end()),
                format_timestamp(other.start)
            )));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(TimeSeries {
            values,
            ..self.clone()
        })
    }
}

/// Averages `raw` over consecutive bins of width `interval`, anchored at the
/// first timestamp. The trailing bin is kept if it holds any rows.
pub fn downsample(raw: &RawRecords, interval: Duration) -> Result<TimeSeries> {
    if let Some(index) = raw.rows.iter().position(RawRow::is_missing) {
        return Err(Error::Uncleaned { index });
    }
    let native = raw
        .native_step()
        .ok_or_else(|| Error::InvalidArgument("need at least 2 rows to resample".into()))?
        .num_seconds();
    let step = interval.num_seconds();
    if step < native {
        return Err(Error::Interval(format!(
            "{step}s is finer than the native step {native}s; upsampling is not supported"
        )));
    }
    if step % native != 0 {
        return Err(Error::Interval(format!(
            "{step}s is not a multiple of the native step {native}s"
        )));
    }

    let first = raw.rows[0].timestamp;
    let last = raw.rows[raw.len() - 1].timestamp;
    let span = (last - first).num_seconds() + native;
    let n_bins = ((span + step - 1) / step) as usize;
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for row in &raw.rows {
        let bin = ((row.timestamp - first).num_seconds() / step) as usize;
        sums[bin] += row.value.expect("checked above");
        counts[bin] += 1;
    }
    if let Some(bin) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyBin(format_timestamp(
            first + Duration::seconds(step * bin as i64),
        )));
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    TimeSeries::new(first, interval, values, raw.unit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// First instant of the holdout period.
    pub boundary: NaiveDateTime,
}

/// Splits into (points before `boundary`, points at or after it).
pub fn split_holdout(ts: &TimeSeries, spec: SplitSpec) -> Result<(TimeSeries, TimeSeries)> {
    if spec.boundary <= ts.start || spec.boundary > ts.end() {
        return Err(Error::Split(format!(
            "boundary {} outside series range {} ..= {}",
            format_timestamp(spec.boundary),
            format_timestamp(ts.start),
            format_timestamp(ts.end())
        )));
    }
    let cut = ts.index_at_or_after(spec.boundary);
    if cut < 2 || ts.len() - cut < 2 {
        return Err(Error::Split(format!(
            "split at index {cut} of {} leaves a side with fewer than 2 points",
            ts.len()
        )));
    }
    let head = TimeSeries {
        values: ts.values[..cut].to_vec(),
        ..ts.clone()
    };
    let tail = TimeSeries {
        start: ts.timestamp(cut),
        values: ts.values[cut..].to_vec(),
        ..ts.clone()
    };
    Ok((head, tail))
}

/// Provenance for one ingested dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset: String,
    pub source: String,
    pub unit: PowerUnit,
    pub raw_rows: usize,
    pub gap_policy: GapPolicy,
    pub filled: usize,
    pub native_step_secs: i64,
    pub interval_secs: i64,
    pub points: usize,
    pub start: String,
    pub end: String,
    pub holdout_boundary: String,
    pub train_cv_points: usize,
    pub holdout_points: usize,
    pub train_cv_pct: f64,
    pub holdout_pct: f64,
}

impl DatasetManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A cleaned, resampled and split dataset with its manifest.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub manifest: DatasetManifest,
    pub train_cv: TimeSeries,
    pub holdout: TimeSeries,
}

/// Cleans `raw`, resamples it to `interval` (the native step when `None`)
/// and splits it at `split.boundary`.
pub fn prepare_dataset(
    dataset: &str,
    raw: &RawRecords,
    policy: GapPolicy,
    interval: Option<Duration>,
    split: SplitSpec,
) -> Result<PreparedDataset> {
    let (cleaned, filled) = clean(raw, policy)?;
    let native = cleaned
        .native_step()
        .ok_or_else(|| Error::InvalidArgument("need at least 2 rows".into()))?;
    let ts = downsample(&cleaned, interval.unwrap_or(native))?;
    let (train_cv, holdout) = split_holdout(&ts, split)?;
    let pct = |n: usize| 100.0 * n as f64 / ts.len() as f64;
    let manifest = DatasetManifest {
        dataset: dataset.to_string(),
        source: raw.source_id().to_string(),
        unit: raw.unit(),
        raw_rows: raw.len(),
        gap_policy: policy,
        filled,
        native_step_secs: native.num_seconds(),
        interval_secs: ts.interval_secs,
        points: ts.len(),
        start: format_timestamp(ts.start()),
        end: format_timestamp(ts.end()),
        holdout_boundary: format_timestamp(split.boundary),
        train_cv_points: train_cv.len(),
        holdout_points: holdout.len(),
        train_cv_pct: pct(train_cv.len()),
        holdout_pct: pct(holdout.len()),
    };
    Ok(PreparedDataset {
        manifest,
        train_cv,
        holdout,
    })
}

/// Writes `timestamp,value` rows.
pub fn write_series_csv<W: Write>(ts: &TimeSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["timestamp", "value"])?;
    for (i, v) in ts.values.iter().enumerate() {
        w.write_record([format_timestamp(ts.timestamp(i)), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<series csv>", e))?;
    Ok(())
}

/// Reads a file produced by [`write_series_csv`]; the grid must be uniform.
pub fn read_series_csv<R: Read>(input: R, unit: PowerUnit) -> Result<TimeSeries> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut stamps = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |m: &str| Error::Row {
            line,
            message: m.to_string(),
        };
        stamps.push(parse_timestamp(rec.get(0).ok_or_else(|| bad("no timestamp"))?)?);
        values.push(
            rec.get(1)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| bad("bad value"))?,
        );
    }
    if stamps.len() < 2 {
        return Err(Error::InvalidArgument("series file has fewer than 2 rows".into()));
    }
    let interval = stamps[1] - stamps[0];
    for (i, w) in stamps.windows(2).enumerate() {
        if w[1] - w[0] != interval {
            return Err(Error::Interval(format!("non-uniform spacing after row {}", i + 1)));
        }
    }
    TimeSeries::new(stamps[0], interval, values, unit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> NaiveDateTime {
        parse_timestamp(s).unwrap()
    }

    fn minutes(values: &[Option<f64>]) -> RawRecords {
        let t0 = ts("2020-01-01T00:00:00");
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, &value)| RawRow {
                timestamp: t0 + Duration::minutes(i as i64),
                value,
            })
            .collect();
        RawRecords::new("test", PowerUnit::KW, rows).unwrap()
    }

    fn uci_schema() -> CsvSchema {
        CsvSchema::new(&["Date", "Time"], "%d/%m/%Y %H:%M:%S", "Global_active_power")
            .delimiter(';')
            .missing("?")
    }

    #[test]
    fn household_style_line() {
        let text = "Date;Time;Global_active_power;Global_reactive_power;Voltage\n\
                    16/12/2006;17:24:00;4.216;0.418;234.840\n\
                    16/12/2006;17:25:00;?;?;?\n";
        let raw = parse_csv(text.as_bytes(), &uci_schema(), "uci", PowerUnit::KW).unwrap();
        assert_eq!(raw.len(), 2);
        assert_eq!(raw.rows()[0].timestamp, ts("2006-12-16T17:24:00"));
        assert_eq!(raw.rows()[0].value, Some(4.216));
        assert!(raw.rows()[1].is_missing());
    }

    #[test]
    fn comma_file_keeps_order() {
        let text = "time,load\n2020-01-01 00:00,1.5\n2020-01-01 00:10,2.5\n2020-01-01 00:20,3.5\n";
        let schema = CsvSchema::new(&["time"], "%Y-%m-%d %H:%M", "load");
        let raw = parse_csv(text.as_bytes(), &schema, "s", PowerUnit::W).unwrap();
        let v: Vec<_> = raw.rows().iter().map(|r| r.value.unwrap()).collect();
        assert_eq!(v, [1.5, 2.5, 3.5]);
    }

    #[test]
    fn decimal_comma_and_period_index() {
        let text = "DATE;PERIOD;DEMAND\n01/03/2011;1;4500,5\n01/03/2011;2;4400,25\n";
        let schema = CsvSchema::new(&["DATE"], "%d/%m/%Y", "DEMAND")
            .delimiter(';')
            .decimal(',')
            .period("PERIOD", 30);
        let raw = parse_csv(text.as_bytes(), &schema, "sg", PowerUnit::MW).unwrap();
        assert_eq!(raw.rows()[1].timestamp, ts("2011-03-01T00:30:00"));
        assert_eq!(raw.rows()[1].value, Some(4400.25));
    }

    #[test]
    fn bad_timestamp_reports_line() {
        let text = "time,load\n2020-01-01 00:00,1\nnot-a-date,2\n";
        let schema = CsvSchema::new(&["time"], "%Y-%m-%d %H:%M", "load");
        match parse_csv(text.as_bytes(), &schema, "s", PowerUnit::W) {
            Err(Error::Row { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn nonmonotonic_is_structural() {
        let text = "time,load\n2020-01-01 00:10,1\n2020-01-01 00:00,2\n";
        let schema = CsvSchema::new(&["time"], "%Y-%m-%d %H:%M", "load");
        assert!(matches!(
            parse_csv(text.as_bytes(), &schema, "s", PowerUnit::W),
            Err(Error::NonMonotonic { .. })
        ));
    }

    #[test]
    fn unknown_column_is_schema_error() {
        let text = "time,load\n2020-01-01 00:00,1\n";
        let schema = CsvSchema::new(&["time"], "%Y-%m-%d %H:%M", "power");
        assert!(matches!(
            parse_csv(text.as_bytes(), &schema, "s", PowerUnit::W),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn forward_fill() {
        let raw = minutes(&[Some(1.0), None, None, Some(2.0)]);
        let (cleaned, fills) = clean(&raw, GapPolicy::ForwardFill).unwrap();
        let v: Vec<_> = cleaned.rows().iter().map(|r| r.value.unwrap()).collect();
        assert_eq!(v, [1.0, 1.0, 1.0, 2.0]);
        assert_eq!(fills, 2);

        let (again, fills) = clean(&cleaned, GapPolicy::ForwardFill).unwrap();
        assert_eq!(again, cleaned);
        assert_eq!(fills, 0);
    }

    #[test]
    fn leading_gap_has_no_source() {
        let raw = minutes(&[None, Some(1.0)]);
        assert!(matches!(
            clean(&raw, GapPolicy::ForwardFill),
            Err(Error::NoFillSource { index: 0 })
        ));
    }

    #[test]
    fn downsample_means() {
        let raw = minutes(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0].map(Some));
        let ds = downsample(&raw, Duration::minutes(3)).unwrap();
        assert_eq!(ds.values(), &[2.0, 5.0]);
        assert_eq!(ds.interval(), Duration::minutes(3));

        let same = downsample(&raw, Duration::minutes(1)).unwrap();
        assert_eq!(same.values(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn downsample_keeps_partial_tail() {
        let raw = minutes(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0].map(Some));
        let ds = downsample(&raw, Duration::minutes(3)).unwrap();
        assert_eq!(ds.values(), &[2.0, 5.0, 7.0]);
    }

    #[test]
    fn downsample_rejects_bad_intervals_and_gaps() {
        let raw = minutes(&[1.0, 2.0, 3.0, 4.0].map(Some));
        assert!(matches!(
            downsample(&raw, Duration::seconds(30)),
            Err(Error::Interval(_))
        ));
        assert!(matches!(
            downsample(&raw, Duration::seconds(90)),
            Err(Error::Interval(_))
        ));

        let t0 = ts("2020-01-01T00:00:00");
        let rows = [0, 1, 7, 8]
            .iter()
            .map(|&m| RawRow {
                timestamp: t0 + Duration::minutes(m),
                value: Some(1.0),
            })
            .collect();
        let gappy = RawRecords::new("g", PowerUnit::W, rows).unwrap();
        assert!(matches!(
            downsample(&gappy, Duration::minutes(3)),
            Err(Error::EmptyBin(_))
        ));

        let missing = minutes(&[Some(1.0), None]);
        assert!(matches!(
            downsample(&missing, Duration::minutes(1)),
            Err(Error::Uncleaned { index: 1 })
        ));
    }

    #[test]
    fn split_counts() {
        let t0 = ts("2020-01-01T00:00:00");
        let series = TimeSeries::new(
            t0,
            Duration::hours(1),
            (0..10).map(f64::from).collect(),
            PowerUnit::W,
        )
        .unwrap();
        let (a, b) = split_holdout(
            &series,
            SplitSpec {
                boundary: t0 + Duration::hours(7),
            },
        )
        .unwrap();
        assert_eq!((a.len(), b.len()), (7, 3));
        assert_eq!(b.start(), t0 + Duration::hours(7));
        assert_eq!(a.concat(&b).unwrap(), series);

        // Off-grid boundary rounds up to the next point.
        let (a, _) = split_holdout(
            &series,
            SplitSpec {
                boundary: t0 + Duration::minutes(6 * 60 + 1),
            },
        )
        .unwrap();
        assert_eq!(a.len(), 7);
    }

    #[test]
    fn prepare_fills_resamples_and_splits() {
        // 15 one-minute rows with one gap, resampled to 3 minutes.
        let mut vals: Vec<Option<f64>> = (1..=15).map(|v| Some(f64::from(v))).collect();
        vals[4] = None;
        let raw = minutes(&vals);
        let p = prepare_dataset(
            "toy",
            &raw,
            GapPolicy::ForwardFill,
            Some(Duration::minutes(3)),
            SplitSpec {
                boundary: ts("2020-01-01T00:09:00"),
            },
        )
        .unwrap();
        // Bins: [1,2,3] [4,4,6] [7,8,9] [10,11,12] [13,14,15]
        assert_eq!(p.train_cv.values(), &[2.0, 14.0 / 3.0, 8.0]);
        assert_eq!(p.holdout.values(), &[11.0, 14.0]);
        assert_eq!(p.manifest.filled, 1);
        assert_eq!(p.manifest.points, 5);
        assert_eq!((p.manifest.train_cv_points, p.manifest.holdout_points), (3, 2));
        assert_eq!(p.manifest.native_step_secs, 60);
        assert_eq!(p.manifest.train_cv_pct, 60.0);
    }

    #[test]
    fn split_rejects_outside_boundary() {
        let t0 = ts("2020-01-01T00:00:00");
        let series = TimeSeries::new(t0, Duration::hours(1), vec![1.0; 10], PowerUnit::W).unwrap();
        for boundary in [t0, t0 - Duration::hours(1), t0 + Duration::hours(10)] {
            assert!(split_holdout(&series, SplitSpec { boundary }).is_err());
        }
        // One-point holdout side.
        assert!(split_holdout(
            &series,
            SplitSpec {
                boundary: t0 + Duration::hours(9)
            }
        )
        .is_err());
    }

    #[test]
    fn series_csv_roundtrip() {
        let t0 = ts("2021-06-01T00:00:00");
        let series =
            TimeSeries::new(t0, Duration::minutes(30), vec![0.1, 2.5, -3.75, 1e-3], PowerUnit::MW)
                .unwrap();
        let mut buf = Vec::new();
        write_series_csv(&series, &mut buf).unwrap();
        let back = read_series_csv(buf.as_slice(), PowerUnit::MW).unwrap();
        assert_eq!(back, series);
    }
}
