//! Series containers, dataset ingestion and fixed-origin splitting.
//!
//! Two interchange formats are supported. The wide CSV has no header and one
//! series per row:
//!
//! ```text
//! id,period_s,horizon_h,category,v1,v2,...,vN
//! ```
//!
//! Blank `horizon_h` resolves from the frequency, blank `category` is `None`,
//! and trailing empty cells are ignored. The JSONL form carries one object per
//! line with keys `id`, `s`, `h`, `category` and `values`. Values are written
//! with the shortest decimal rendering that round-trips an `f64`, so both
//! formats reload bit-exactly.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building or loading series.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed row at line {line} (byte offset {offset}): {reason}")]
    MalformedRow {
        line: u64,
        offset: u64,
        reason: String,
    },
    #[error("series '{0}' contains a non-finite value")]
    NonFiniteValue(String),
    #[error(
        "series '{id}' is too short for horizon {horizon}: {len} values, need at least {needed}"
    )]
    HorizonTooLarge {
        id: String,
        len: usize,
        horizon: usize,
        needed: usize,
    },
    #[error("series '{0}' has no horizon and its frequency has no default horizon")]
    MissingHorizon(String),
    #[error("series '{0}' has an invalid seasonal period or horizon")]
    InvalidShape(String),
    #[error("duplicate series id '{0}'")]
    DuplicateId(String),
    #[error("unknown dataset format '{0}'")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sampling frequency of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Yearly,
    Quarterly,
    Monthly,
    Other,
}

impl Frequency {
    /// Forecast horizon used by the M competitions for this frequency.
    pub fn default_horizon(self) -> Option<usize> {
        match self {
            Frequency::Yearly => Some(6),
            Frequency::Quarterly => Some(8),
            Frequency::Monthly => Some(18),
            Frequency::Other => None,
        }
    }

    /// Frequency implied by a seasonal period.
    pub fn from_period(period: usize) -> Frequency {
        match period {
            1 => Frequency::Yearly,
            4 => Frequency::Quarterly,
            12 => Frequency::Monthly,
            _ => Frequency::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::Yearly => "yearly",
            Frequency::Quarterly => "quarterly",
            Frequency::Monthly => "monthly",
            Frequency::Other => "other",
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Frequency {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "yearly" => Ok(Frequency::Yearly),
            "quarterly" => Ok(Frequency::Quarterly),
            "monthly" => Ok(Frequency::Monthly),
            "other" => Ok(Frequency::Other),
            _ => Err(format!("unknown frequency '{s}'")),
        }
    }
}

/// On-disk dataset format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    WideCsv,
    Jsonl,
}

impl FromStr for DataFormat {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wide-csv" | "csv" => Ok(DataFormat::WideCsv),
            "jsonl" => Ok(DataFormat::Jsonl),
            other => Err(DataError::UnknownFormat(other.to_string())),
        }
    }
}

/// Minimum number of in-sample observations for a series with period `s`.
pub fn min_train_len(period: usize) -> usize {
    3.max(2 * period)
}

/// One observed series together with its holdout horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    id: String,
    period: usize,
    horizon: usize,
    category: Option<String>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(
        id: impl Into<String>,
        period: usize,
        horizon: usize,
        category: Option<String>,
        values: Vec<f64>,
    ) -> Result<Self, DataError> {
        let id = id.into();
        if period == 0 || horizon == 0 {
            return Err(DataError::InvalidShape(id));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DataError::NonFiniteValue(id));
        }
        let needed = horizon + min_train_len(period);
        if values.len() < needed {
            return Err(DataError::HorizonTooLarge {
                id,
                len: values.len(),
                horizon,
                needed,
            });
        }
        Ok(TimeSeries {
            id,
            period,
            horizon,
            category,
            values,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Observations per seasonal cycle.
    pub fn period(&self) -> usize {
        self.period
    }

    /// Number of withheld observations.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn category(&self) -> Option<&str> {
        self.category.as_deref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Withhold the last `horizon` observations.
    pub fn split(&self) -> SplitSeries<'_> {
        split_fixed_origin(self)
    }
}

/// Train/test partition of a series at a single forecast origin.
///
/// Fitting code only ever receives [`SplitSeries::train`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSeries<'a> {
    train: &'a [f64],
    test: &'a [f64],
}

impl<'a> SplitSeries<'a> {
    pub fn train(&self) -> &'a [f64] {
        self.train
    }

    pub fn test(&self) -> &'a [f64] {
        self.test
    }

    /// Index of the last in-sample observation (the train length).
    pub fn origin(&self) -> usize {
        self.train.len()
    }

    pub fn horizon(&self) -> usize {
        self.test.len()
    }
}

/// Split a series at `N - h`: the test segment is exactly the last `h` values.
pub fn split_fixed_origin(series: &TimeSeries) -> SplitSeries<'_> {
    let (train, test) = series.values.split_at(series.values.len() - series.horizon);
    SplitSeries { train, test }
}

/// A collection of series with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    series: Vec<TimeSeries>,
    frequency: Frequency,
}

impl Dataset {
    pub fn new(series: Vec<TimeSeries>, frequency: Frequency) -> Result<Self, DataError> {
        let mut seen = HashSet::with_capacity(series.len());
        for s in &series {
            if !seen.insert(s.id.as_str()) {
                return Err(DataError::DuplicateId(s.id.clone()));
            }
        }
        Ok(Dataset { series, frequency })
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Keep the first `n` series.
    pub fn truncated(&self, n: usize) -> Dataset {
        Dataset {
            series: self.series.iter().take(n).cloned().collect(),
            frequency: self.frequency,
        }
    }

    /// Stable 64-bit FNV-1a digest over ids, shapes and value bits.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::default();
        for s in &self.series {
            h.write(s.id.as_bytes());
            h.write(&(s.period as u64).to_le_bytes());
            h.write(&(s.horizon as u64).to_le_bytes());
            for v in &s.values {
                h.write(&v.to_bits().to_le_bytes());
            }
        }
        h.finish()
    }
}

/// FNV-1a, used for dataset fingerprints and per-series seed derivation.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv1a {
    pub fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRecord {
    id: String,
    s: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h: Option<usize>,
    #[serde(default)]
    category: Option<String>,
    values: Vec<f64>,
}

/// Load a dataset from `path`.
///
/// `frequency` labels the dataset; when `None` it is inferred from the
/// seasonal periods (a single shared period maps to its frequency, anything
/// else is `other`). Rows without a horizon take the default horizon of the
/// label, or of their own period when the label is inferred.
pub fn load_dataset(
    path: impl AsRef<Path>,
    format: DataFormat,
    frequency: Option<Frequency>,
) -> Result<Dataset, DataError> {
    let file = File::open(path)?;
    read_dataset(BufReader::new(file), format, frequency)
}

pub fn read_dataset<R: Read>(
    reader: R,
    format: DataFormat,
    frequency: Option<Frequency>,
) -> Result<Dataset, DataError> {
    let rows = match format {
        DataFormat::WideCsv => read_wide_csv(reader)?,
        DataFormat::Jsonl => read_jsonl(reader)?,
    };
    let label = frequency.unwrap_or_else(|| {
        let mut periods = rows.iter().map(|r| r.s);
        match periods.next() {
            Some(first) if periods.all(|p| p == first) => Frequency::from_period(first),
            _ => Frequency::Other,
        }
    });
    let mut series = Vec::with_capacity(rows.len());
    for row in rows {
        let horizon = match row.h {
            Some(h) => h,
            None => {
                let freq = frequency.unwrap_or_else(|| Frequency::from_period(row.s));
                freq.default_horizon()
                    .ok_or_else(|| DataError::MissingHorizon(row.id.clone()))?
            }
        };
        series.push(TimeSeries::new(
            row.id,
            row.s,
            horizon,
            row.category,
            row.values,
        )?);
    }
    Dataset::new(series, label)
}

fn read_wide_csv<R: Read>(reader: R) -> Result<Vec<JsonRecord>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let pos = rdr.position().clone();
        let more = rdr.read_record(&mut record).map_err(|e| {
            let (line, offset) = e
                .position()
                .map(|p| (p.line(), p.byte()))
                .unwrap_or((pos.line(), pos.byte()));
            DataError::MalformedRow {
                line,
                offset,
                reason: e.to_string(),
            }
        })?;
        if !more {
            break;
        }
        let line = pos.line();
        let offset = pos.byte();
        let malformed = |reason: String| DataError::MalformedRow {
            line,
            offset,
            reason,
        };
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        if record.len() < 5 {
            return Err(malformed(format!(
                "expected at least 5 cells, found {}",
                record.len()
            )));
        }
        let id = record[0].trim().to_string();
        if id.is_empty() {
            return Err(malformed("empty id".into()));
        }
        let s: usize = record[1]
            .trim()
            .parse()
            .map_err(|_| malformed(format!("bad period '{}'", &record[1])))?;
        let h = match record[2].trim() {
            "" => None,
            txt => Some(
                txt.parse::<usize>()
                    .map_err(|_| malformed(format!("bad horizon '{txt}'")))?,
            ),
        };
        let category = match record[3].trim() {
            "" => None,
            txt => Some(txt.to_string()),
        };
        let cells: Vec<&str> = record.iter().skip(4).map(str::trim).collect();
        let used = cells
            .iter()
            .rposition(|c| !c.is_empty())
            .map_or(0, |i| i + 1);
        let mut values = Vec::with_capacity(used);
        for cell in &cells[..used] {
            if cell.is_empty() {
                return Err(malformed("empty value cell before the last value".into()));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| malformed(format!("bad value '{cell}'")))?;
            if !v.is_finite() {
                return Err(DataError::NonFiniteValue(id));
            }
            values.push(v);
        }
        out.push(JsonRecord {
            id,
            s,
            h,
            category,
            values,
        });
    }
    Ok(out)
}

fn read_jsonl<R: Read>(reader: R) -> Result<Vec<JsonRecord>, DataError> {
    let mut out = Vec::new();
    let mut offset = 0u64;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let start = offset;
        offset += line.len() as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        // NaN/Infinity are not JSON; catch them before serde reports a generic error.
        let rec: JsonRecord = serde_json::from_str(&line).map_err(|e| {
            if ["NaN", "Infinity"].iter().any(|t| line.contains(t)) {
                let id = serde_json::from_str::<serde_json::Value>(&line.replace("NaN", "null"))
                    .ok()
                    .and_then(|v| v.get("id").and_then(|x| x.as_str()).map(String::from))
                    .unwrap_or_default();
                DataError::NonFiniteValue(id)
            } else {
                DataError::MalformedRow {
                    line: idx as u64 + 1,
                    offset: start,
                    reason: e.to_string(),
                }
            }
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Write `dataset` in the given format.
pub fn write_dataset<W: Write>(
    dataset: &Dataset,
    writer: W,
    format: DataFormat,
) -> Result<(), DataError> {
    let mut w = BufWriter::new(writer);
    for s in &dataset.series {
        match format {
            DataFormat::WideCsv => {
                write!(
                    w,
                    "{},{},{},{}",
                    s.id,
                    s.period,
                    s.horizon,
                    s.category.as_deref().unwrap_or("")
                )?;
                for v in &s.values {
                    write!(w, ",{v:?}")?;
                }
                writeln!(w)?;
            }
            DataFormat::Jsonl => {
                let rec = JsonRecord {
                    id: s.id.clone(),
                    s: s.period,
                    h: Some(s.horizon),
                    category: s.category.clone(),
                    values: s.values.clone(),
                };
                serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
                writeln!(w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(
    dataset: &Dataset,
    path: impl AsRef<Path>,
    format: DataFormat,
) -> Result<(), DataError> {
    write_dataset(dataset, File::create(path)?, format)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_csv(text: &str) -> Result<Dataset, DataError> {
        read_dataset(text.as_bytes(), DataFormat::WideCsv, None)
    }

    #[test]
    fn wide_row_maps_fields() {
        let ds = load_csv("s1,4,2,,1.0,2.0,3.0,4.0,5.0,6.0,7.0,8.0,9.0,10.0\n").unwrap();
        let s = &ds.series()[0];
        assert_eq!(s.id(), "s1");
        assert_eq!(s.period(), 4);
        assert_eq!(s.horizon(), 2);
        assert_eq!(s.len(), 10);
        assert_eq!(s.category(), None);
    }

    #[test]
    fn monthly_row_without_horizon_uses_eighteen() {
        let values: Vec<String> = (1..=60).map(|v| format!("{v}.5")).collect();
        let row = format!("m1,12,,MICRO,{}\n", values.join(","));
        let ds = load_csv(&row).unwrap();
        assert_eq!(ds.series()[0].horizon(), 18);
        assert_eq!(ds.frequency(), Frequency::Monthly);
        assert_eq!(ds.series()[0].category(), Some("MICRO"));
    }

    #[test]
    fn nan_is_rejected() {
        let err = load_csv("s1,1,2,,1.0,NaN,3.0,4.0,5.0,6.0\n").unwrap_err();
        assert!(matches!(err, DataError::NonFiniteValue(id) if id == "s1"));
        let err = read_dataset(
            r#"{"id":"j","s":1,"h":1,"values":[1.0,NaN,2.0,3.0]}"#.as_bytes(),
            DataFormat::Jsonl,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, DataError::NonFiniteValue(id) if id == "j"));
    }

    #[test]
    fn trailing_empty_cells_are_ignored() {
        let ds = load_csv("a,1,1,x,1,2,3,4,,,\n").unwrap();
        assert_eq!(ds.series()[0].values(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn interior_gap_reports_offset() {
        let text = "a,1,1,,1,2,3,4\nb,1,1,,1,,3,4\n";
        match load_csv(text).unwrap_err() {
            DataError::MalformedRow { line, offset, .. } => {
                assert_eq!(line, 2);
                assert_eq!(offset, 15);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn short_series_rejected() {
        // s = 4 needs 8 in-sample points plus the horizon.
        let err = load_csv("a,4,2,,1,2,3,4,5,6,7,8,9\n").unwrap_err();
        assert!(matches!(err, DataError::HorizonTooLarge { needed: 10, .. }));
    }

    #[test]
    fn unknown_frequency_without_horizon_fails() {
        let err = load_csv("a,7,,,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16\n").unwrap_err();
        assert!(matches!(err, DataError::MissingHorizon(_)));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = load_csv("a,1,1,,1,2,3,4\na,1,1,,1,2,3,4\n").unwrap_err();
        assert!(matches!(err, DataError::DuplicateId(_)));
    }

    #[test]
    fn split_takes_last_h() {
        let s = TimeSeries::new("x", 1, 2, None, (1..=10).map(f64::from).collect()).unwrap();
        let sp = split_fixed_origin(&s);
        assert_eq!(sp.train(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(sp.test(), &[9.0, 10.0]);
        assert_eq!(sp.origin(), 8);
        let joined: Vec<f64> = sp.train().iter().chain(sp.test()).copied().collect();
        assert_eq!(joined, s.values());
    }

    #[test]
    fn split_at_minimum_length() {
        // N - h = max(3, 2s) for s = 4.
        let s = TimeSeries::new("x", 4, 3, None, (0..11).map(f64::from).collect()).unwrap();
        assert_eq!(s.split().train().len(), 8);
        assert_eq!(s.split().horizon(), 3);
    }

    #[test]
    fn fingerprint_tracks_values() {
        let a = load_csv("a,1,1,,1,2,3,4\n").unwrap();
        let b = load_csv("a,1,1,,1,2,3,4.0000001\n").unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
    }
}
