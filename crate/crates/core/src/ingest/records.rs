use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};

use super::IngestError;
use crate::indicators::{
    confusion_from_roc, normalize, ConfusionCounts, IndicatorError, IndicatorValue,
    NormalizedConfusion,
};
use crate::summarizer::SourceRecord;

/// Tolerance applied to redundant ROC-row fields when reading files.
pub const DEFAULT_CONSISTENCY_TOLERANCE: f64 = 1e-6;

const COUNT_COLUMNS: [&str; 4] = ["tn", "fp", "fn", "tp"];
const ROC_REQUIRED: [&str; 3] = ["prior_pos", "fpr", "tpr"];
const ROC_OPTIONAL: [&str; 2] = ["tau_pos", "ppv"];
const KEY_COLUMNS: [&str; 3] = ["algorithm", "category", "video"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    CountsCsv,
    RocCsv,
    Json,
}

impl InputFormat {
    /// Guesses the format from the extension, then from the CSV header.
    pub fn sniff(path: &Path, text: &str) -> Option<InputFormat> {
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            return Some(InputFormat::Json);
        }
        let header: Vec<String> = text
            .lines()
            .next()?
            .split(',')
            .map(|h| h.trim().to_ascii_lowercase())
            .collect();
        if header.iter().any(|h| h == "tn") {
            Some(InputFormat::CountsCsv)
        } else if header.iter().any(|h| h == "prior_pos") {
            Some(InputFormat::RocCsv)
        } else {
            None
        }
    }
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "counts-csv" | "counts" => Ok(InputFormat::CountsCsv),
            "roc-csv" | "roc" => Ok(InputFormat::RocCsv),
            "json" => Ok(InputFormat::Json),
            other => Err(format!(
                "unknown input format '{other}' (expected counts-csv|roc-csv|json)"
            )),
        }
    }
}

/// Per-video ROC-style indicators; the optional fields are redundant and
/// checked against the required ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocIndicatorRow {
    pub prior_pos: f64,
    pub fpr: IndicatorValue,
    pub tpr: IndicatorValue,
    pub tau_pos: Option<f64>,
    pub ppv: Option<IndicatorValue>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    Counts(ConfusionCounts),
    Roc(RocIndicatorRow),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRecord {
    pub algorithm: String,
    pub category: String,
    pub video_id: String,
    pub payload: Payload,
    pub size: Option<u64>,
    /// Source line (CSV) or 1-based element index (JSON).
    pub line: u64,
}

impl EvaluationRecord {
    pub fn confusion(&self) -> Result<NormalizedConfusion, IndicatorError> {
        match &self.payload {
            Payload::Counts(c) => normalize(c),
            Payload::Roc(r) => confusion_from_roc(r.prior_pos, r.fpr, r.tpr),
        }
    }

    /// Explicit size, else the total count for count payloads.
    pub fn effective_size(&self) -> Option<u64> {
        match (&self.payload, self.size) {
            (_, Some(size)) => Some(size),
            (Payload::Counts(c), None) => c.checked_total(),
            (Payload::Roc(_), None) => None,
        }
    }

    pub fn to_source(&self) -> Result<SourceRecord, IngestError> {
        let confusion = self.confusion().map_err(|e| IngestError::Domain {
            line: self.line,
            reason: format!("video '{}': {e}", self.video_id),
        })?;
        Ok(SourceRecord {
            video_id: self.video_id.clone(),
            category: self.category.clone(),
            size: self.effective_size(),
            confusion,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyViolation {
    pub field: &'static str,
    pub expected: IndicatorValue,
    pub found: IndicatorValue,
}

impl fmt::Display for ConsistencyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: expected {}, found {}",
            self.field, self.expected, self.found
        )
    }
}

/// Checks the redundant `tau_pos` and `ppv` fields of a row against the
/// prior, FPR and TPR. Rows without those fields are trivially consistent.
pub fn check_consistency(
    row: &RocIndicatorRow,
    tolerance: f64,
) -> Result<(), Vec<ConsistencyViolation>> {
    let prior_neg = 1.0 - row.prior_pos;
    // a rate is irrelevant (and may be undefined) when its class is empty
    let mass = |prior: f64, rate: IndicatorValue| -> Option<f64> {
        if prior > 0.0 {
            rate.value().map(|r| prior * r)
        } else {
            Some(0.0)
        }
    };
    let (Some(fp_mass), Some(tp_mass)) = (mass(prior_neg, row.fpr), mass(row.prior_pos, row.tpr))
    else {
        return Ok(());
    };
    let implied_tau = fp_mass + tp_mass;

    let mut violations = Vec::new();
    if let Some(tau) = row.tau_pos {
        if (implied_tau - tau).abs() > tolerance {
            violations.push(ConsistencyViolation {
                field: "tau_pos",
                expected: IndicatorValue::Defined(implied_tau),
                found: IndicatorValue::Defined(tau),
            });
        }
    }
    if let Some(ppv) = row.ppv {
        let tau = row.tau_pos.unwrap_or(implied_tau);
        if tau > 0.0 {
            let expected = tp_mass / tau;
            let ok = ppv
                .value()
                .is_some_and(|p| (expected - p).abs() <= tolerance);
            if !ok {
                violations.push(ConsistencyViolation {
                    field: "ppv",
                    expected: IndicatorValue::Defined(expected),
                    found: ppv,
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Reads a records file, checking redundant fields at
/// [`DEFAULT_CONSISTENCY_TOLERANCE`].
pub fn read_records(
    path: &Path,
    format: InputFormat,
) -> Result<Vec<EvaluationRecord>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    parse_records(&text, format, DEFAULT_CONSISTENCY_TOLERANCE)
}

pub fn parse_records(
    text: &str,
    format: InputFormat,
    tolerance: f64,
) -> Result<Vec<EvaluationRecord>, IngestError> {
    let records = match format {
        InputFormat::CountsCsv | InputFormat::RocCsv => parse_csv(text, format, tolerance)?,
        InputFormat::Json => parse_json(text, tolerance)?,
    };
    let mut seen = HashSet::new();
    for r in &records {
        if !seen.insert((r.algorithm.as_str(), r.video_id.as_str())) {
            return Err(IngestError::Duplicate {
                line: r.line,
                algorithm: r.algorithm.clone(),
                video: r.video_id.clone(),
            });
        }
    }
    Ok(records)
}

/// Field accessor shared by the CSV and JSON readers.
trait Fields {
    fn line(&self) -> u64;
    /// `None` when the field is absent or empty.
    fn text(&self, name: &str) -> Option<String>;
}

fn required(fields: &impl Fields, name: &str) -> Result<String, IngestError> {
    fields.text(name).ok_or_else(|| IngestError::Parse {
        line: fields.line(),
        reason: format!("missing value for '{name}'"),
    })
}

fn parse_count(fields: &impl Fields, name: &str) -> Result<u64, IngestError> {
    let raw = required(fields, name)?;
    let line = fields.line();
    raw.parse::<u64>().map_err(|_| {
        if raw.parse::<i128>().is_ok_and(|v| v < 0) {
            IngestError::Domain {
                line,
                reason: format!("'{name}' is negative ({raw})"),
            }
        } else {
            IngestError::Parse {
                line,
                reason: format!("'{name}' is not an unsigned integer: '{raw}'"),
            }
        }
    })
}

fn parse_size(fields: &impl Fields) -> Result<Option<u64>, IngestError> {
    if fields.text("size").is_none() {
        return Ok(None);
    }
    let size = parse_count(fields, "size")?;
    if size == 0 {
        return Err(IngestError::Domain {
            line: fields.line(),
            reason: "'size' must be at least 1".into(),
        });
    }
    Ok(Some(size))
}

fn parse_unit(fields: &impl Fields, name: &str, raw: &str) -> Result<f64, IngestError> {
    let value: f64 = raw.parse().map_err(|_| IngestError::Parse {
        line: fields.line(),
        reason: format!("'{name}' is not a number: '{raw}'"),
    })?;
    if !(0.0..=1.0).contains(&value) {
        return Err(IngestError::Domain {
            line: fields.line(),
            reason: format!("'{name}' = {value} is outside [0, 1]"),
        });
    }
    Ok(value)
}

fn parse_rate(fields: &impl Fields, name: &str) -> Result<IndicatorValue, IngestError> {
    match fields.text(name) {
        None => Ok(IndicatorValue::Undefined),
        Some(raw) if raw.eq_ignore_ascii_case("na") => Ok(IndicatorValue::Undefined),
        Some(raw) => parse_unit(fields, name, &raw).map(IndicatorValue::Defined),
    }
}

fn parse_record(
    fields: &impl Fields,
    format: InputFormat,
    tolerance: f64,
) -> Result<EvaluationRecord, IngestError> {
    let line = fields.line();
    let algorithm = required(fields, "algorithm")?;
    let video_id = required(fields, "video")?;
    let category = fields.text("category").unwrap_or_default();
    let size = parse_size(fields)?;

    let payload = match format {
        InputFormat::CountsCsv => {
            let c = COUNT_COLUMNS.map(|name| parse_count(fields, name));
            let [tn, fp, fn_, tp] = c;
            Payload::Counts(ConfusionCounts::new(tn?, fp?, fn_?, tp?).map_err(|e| {
                IngestError::Domain {
                    line,
                    reason: e.to_string(),
                }
            })?)
        }
        _ => {
            let prior = required(fields, "prior_pos")?;
            let row = RocIndicatorRow {
                prior_pos: parse_unit(fields, "prior_pos", &prior)?,
                fpr: parse_rate(fields, "fpr")?,
                tpr: parse_rate(fields, "tpr")?,
                tau_pos: fields
                    .text("tau_pos")
                    .map(|raw| parse_unit(fields, "tau_pos", &raw))
                    .transpose()?,
                ppv: fields
                    .text("ppv")
                    .map(|_| parse_rate(fields, "ppv"))
                    .transpose()?,
            };
            check_consistency(&row, tolerance)
                .map_err(|violations| IngestError::Inconsistent { line, violations })?;
            Payload::Roc(row)
        }
    };

    let record = EvaluationRecord {
        algorithm,
        category,
        video_id,
        payload,
        size,
        line,
    };
    if let Payload::Counts(c) = &record.payload {
        if c.total() == 0 {
            return Err(IngestError::Domain {
                line,
                reason: "all counts are zero".into(),
            });
        }
    }
    // validates that the needed rates are present for the given prior
    record.confusion().map_err(|e| IngestError::Domain {
        line,
        reason: e.to_string(),
    })?;
    Ok(record)
}

struct CsvRow<'a> {
    header: &'a [String],
    record: &'a csv::StringRecord,
    line: u64,
}

impl Fields for CsvRow<'_> {
    fn line(&self) -> u64 {
        self.line
    }

    fn text(&self, name: &str) -> Option<String> {
        let idx = self.header.iter().position(|h| h == name)?;
        self.record
            .get(idx)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
    }
}

fn check_header(header: &[String], format: InputFormat) -> Result<(), IngestError> {
    let (required, optional): (Vec<&str>, Vec<&str>) = match format {
        InputFormat::CountsCsv => (
            KEY_COLUMNS.iter().chain(&COUNT_COLUMNS).copied().collect(),
            vec!["size"],
        ),
        _ => (
            KEY_COLUMNS.iter().chain(&ROC_REQUIRED).copied().collect(),
            ROC_OPTIONAL.iter().copied().chain(["size"]).collect(),
        ),
    };
    let missing: Vec<&str> = required
        .iter()
        .filter(|c| !header.iter().any(|h| h == *c))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(IngestError::Schema(format!(
            "missing column(s): {}",
            missing.join(", ")
        )));
    }
    let extra: Vec<&str> = header
        .iter()
        .filter(|h| !required.contains(&h.as_str()) && !optional.contains(&h.as_str()))
        .map(String::as_str)
        .collect();
    if !extra.is_empty() {
        return Err(IngestError::Schema(format!(
            "unexpected column(s): {}",
            extra.join(", ")
        )));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = header.iter().find(|h| !seen.insert(h.as_str())) {
        return Err(IngestError::Schema(format!("duplicate column '{dup}'")));
    }
    Ok(())
}

fn parse_csv(
    text: &str,
    format: InputFormat,
    tolerance: f64,
) -> Result<Vec<EvaluationRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::Schema(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(IngestError::Schema("missing header row".into()));
    }
    check_header(&header, format)?;

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| IngestError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let fields = CsvRow {
            header: &header,
            record: &row,
            line,
        };
        records.push(parse_record(&fields, format, tolerance)?);
    }
    Ok(records)
}

struct JsonRow<'a> {
    object: &'a Map<String, Value>,
    line: u64,
}

impl Fields for JsonRow<'_> {
    fn line(&self) -> u64 {
        self.line
    }

    fn text(&self, name: &str) -> Option<String> {
        match self.object.get(name)? {
            Value::Null => None,
            Value::String(s) if s.trim().is_empty() => None,
            Value::String(s) => Some(s.trim().to_string()),
            other => Some(other.to_string()),
        }
    }
}

fn parse_json(text: &str, tolerance: f64) -> Result<Vec<EvaluationRecord>, IngestError> {
    let value: Value = serde_json::from_str(text).map_err(|e| IngestError::Parse {
        line: e.line() as u64,
        reason: e.to_string(),
    })?;
    let Value::Array(items) = value else {
        return Err(IngestError::Schema(
            "expected a JSON array of records".into(),
        ));
    };
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let line = i as u64 + 1;
            let object = item.as_object().ok_or_else(|| IngestError::Parse {
                line,
                reason: "record is not a JSON object".into(),
            })?;
            let has_counts = COUNT_COLUMNS.iter().any(|c| object.contains_key(*c));
            let has_roc = ROC_REQUIRED.iter().any(|c| object.contains_key(*c));
            let format = match (has_counts, has_roc) {
                (true, false) => InputFormat::CountsCsv,
                (false, true) => InputFormat::RocCsv,
                _ => {
                    return Err(IngestError::Schema(format!(
                        "record {line}: expected either count fields or ROC fields"
                    )))
                }
            };
            let keys: Vec<String> = object.keys().cloned().collect();
            check_header(&keys, format).map_err(|e| e.context(format!("record {line}")))?;
            parse_record(&JsonRow { object, line }, format, tolerance)
        })
        .collect()
}

fn rate_text(v: IndicatorValue) -> String {
    v.to_string()
}

/// Writes records in `format`. Count records go to counts CSV, ROC records
/// to ROC CSV; JSON takes either.
pub fn write_records<W: Write>(
    records: &[EvaluationRecord],
    format: InputFormat,
    writer: W,
) -> Result<(), IngestError> {
    let wrong_payload = |r: &EvaluationRecord| {
        IngestError::Schema(format!(
            "record for video '{}' cannot be written in {format:?}",
            r.video_id
        ))
    };
    let with_size = records.iter().any(|r| r.size.is_some());
    match format {
        InputFormat::Json => {
            let items: Vec<Value> = records.iter().map(record_to_json).collect();
            let mut writer = writer;
            serde_json::to_writer_pretty(&mut writer, &items)
                .map_err(|e| IngestError::Schema(e.to_string()))?;
            writeln!(writer).map_err(|e| IngestError::io("<output>", e))
        }
        InputFormat::CountsCsv => {
            let mut out = csv::Writer::from_writer(writer);
            let mut header: Vec<&str> = KEY_COLUMNS.iter().chain(&COUNT_COLUMNS).copied().collect();
            if with_size {
                header.push("size");
            }
            write_row(&mut out, header.iter().map(|s| s.to_string()))?;
            for r in records {
                let Payload::Counts(c) = &r.payload else {
                    return Err(wrong_payload(r));
                };
                let mut row = vec![
                    r.algorithm.clone(),
                    r.category.clone(),
                    r.video_id.clone(),
                    c.true_neg.to_string(),
                    c.false_pos.to_string(),
                    c.false_neg.to_string(),
                    c.true_pos.to_string(),
                ];
                if with_size {
                    row.push(r.size.map(|s| s.to_string()).unwrap_or_default());
                }
                write_row(&mut out, row)?;
            }
            out.flush().map_err(|e| IngestError::io("<output>", e))
        }
        InputFormat::RocCsv => {
            let with_tau = records.iter().any(|r| {
                matches!(
                    r.payload,
                    Payload::Roc(RocIndicatorRow {
                        tau_pos: Some(_),
                        ..
                    })
                )
            });
            let with_ppv = records.iter().any(|r| {
                matches!(
                    r.payload,
                    Payload::Roc(RocIndicatorRow { ppv: Some(_), .. })
                )
            });
            let mut out = csv::Writer::from_writer(writer);
            let mut header: Vec<&str> = KEY_COLUMNS.iter().chain(&ROC_REQUIRED).copied().collect();
            if with_tau {
                header.push("tau_pos");
            }
            if with_ppv {
                header.push("ppv");
            }
            if with_size {
                header.push("size");
            }
            write_row(&mut out, header.iter().map(|s| s.to_string()))?;
            for r in records {
                let Payload::Roc(row) = &r.payload else {
                    return Err(wrong_payload(r));
                };
                let mut fields = vec![
                    r.algorithm.clone(),
                    r.category.clone(),
                    r.video_id.clone(),
                    row.prior_pos.to_string(),
                    rate_text(row.fpr),
                    rate_text(row.tpr),
                ];
                if with_tau {
                    fields.push(row.tau_pos.map(|t| t.to_string()).unwrap_or_default());
                }
                if with_ppv {
                    fields.push(row.ppv.map(rate_text).unwrap_or_default());
                }
                if with_size {
                    fields.push(r.size.map(|s| s.to_string()).unwrap_or_default());
                }
                write_row(&mut out, fields)?;
            }
            out.flush().map_err(|e| IngestError::io("<output>", e))
        }
    }
}

fn write_row<W: Write, I: IntoIterator<Item = String>>(
    out: &mut csv::Writer<W>,
    row: I,
) -> Result<(), IngestError> {
    out.write_record(row.into_iter().collect::<Vec<_>>())
        .map_err(|e| IngestError::Schema(e.to_string()))
}

fn record_to_json(r: &EvaluationRecord) -> Value {
    let mut m = Map::new();
    m.insert("algorithm".into(), Value::from(r.algorithm.clone()));
    m.insert("category".into(), Value::from(r.category.clone()));
    m.insert("video".into(), Value::from(r.video_id.clone()));
    let rate = |v: IndicatorValue| v.value().map_or(Value::from("NA"), Value::from);
    match &r.payload {
        Payload::Counts(c) => {
            m.insert("tn".into(), Value::from(c.true_neg));
            m.insert("fp".into(), Value::from(c.false_pos));
            m.insert("fn".into(), Value::from(c.false_neg));
            m.insert("tp".into(), Value::from(c.true_pos));
        }
        Payload::Roc(row) => {
            m.insert("prior_pos".into(), Value::from(row.prior_pos));
            m.insert("fpr".into(), rate(row.fpr));
            m.insert("tpr".into(), rate(row.tpr));
            if let Some(t) = row.tau_pos {
                m.insert("tau_pos".into(), Value::from(t));
            }
            if let Some(p) = row.ppv {
                m.insert("ppv".into(), rate(p));
            }
        }
    }
    if let Some(size) = r.size {
        m.insert("size".into(), Value::from(size));
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const COUNTS: &str =
        "algorithm,category,video,tn,fp,fn,tp\nalgoX,baseline,highway,50,10,20,20\n";

    fn counts_of(r: &EvaluationRecord) -> ConfusionCounts {
        match r.payload {
            Payload::Counts(c) => c,
            _ => panic!("expected counts"),
        }
    }

    #[test]
    fn counts_row() {
        let records = parse_records(COUNTS, InputFormat::CountsCsv, 1e-6).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(
            (
                r.algorithm.as_str(),
                r.category.as_str(),
                r.video_id.as_str()
            ),
            ("algoX", "baseline", "highway")
        );
        assert_eq!(counts_of(r), ConfusionCounts::new(50, 10, 20, 20).unwrap());
        assert_eq!(r.line, 2);
        assert_eq!(r.effective_size(), Some(100));
    }

    #[test]
    fn roc_row_converts_to_confusion() {
        let text = "algorithm,category,video,prior_pos,fpr,tpr\na,c,v1,0.4,0.1666667,0.5\n";
        let records = parse_records(text, InputFormat::RocCsv, 1e-6).unwrap();
        let c = records[0].confusion().unwrap();
        for (got, want) in c.as_array().iter().zip([0.5, 0.1, 0.2, 0.2]) {
            assert!((got - want).abs() < 1e-7, "{got} vs {want}");
        }
    }

    #[test]
    fn negative_count_is_domain_error() {
        let text = "algorithm,category,video,tn,fp,fn,tp\na,c,v,-1,0,0,1\n";
        assert!(matches!(
            parse_records(text, InputFormat::CountsCsv, 1e-6),
            Err(IngestError::Domain { line: 2, .. })
        ));
    }

    #[test]
    fn malformed_rows() {
        let text = "algorithm,category,video,tn,fp,fn,tp\na,c,v,x,0,0,1\n";
        assert!(matches!(
            parse_records(text, InputFormat::CountsCsv, 1e-6),
            Err(IngestError::Parse { line: 2, .. })
        ));
        let text = "algorithm,category,video,tn,fp,fn,tp\na,c,v,1,0,0\n";
        assert!(matches!(
            parse_records(text, InputFormat::CountsCsv, 1e-6),
            Err(IngestError::Parse { .. })
        ));
        let text = "algorithm,category,video,tn,fp,fn,tp\na,c,v,0,0,0,0\n";
        assert!(matches!(
            parse_records(text, InputFormat::CountsCsv, 1e-6),
            Err(IngestError::Domain { .. })
        ));
        let text = "algorithm,category,video,prior_pos,fpr,tpr\na,c,v,0.5,1.2,0.5\n";
        assert!(matches!(
            parse_records(text, InputFormat::RocCsv, 1e-6),
            Err(IngestError::Domain { .. })
        ));
        // TPR required because the prior is positive
        let text = "algorithm,category,video,prior_pos,fpr,tpr\na,c,v,0.5,0.2,NA\n";
        assert!(matches!(
            parse_records(text, InputFormat::RocCsv, 1e-6),
            Err(IngestError::Domain { .. })
        ));
    }

    #[test]
    fn schema_errors() {
        let missing = "algorithm,category,video,tn,fp,fn\na,c,v,1,2,3\n";
        assert!(matches!(
            parse_records(missing, InputFormat::CountsCsv, 1e-6),
            Err(IngestError::Schema(_))
        ));
        let extra = "algorithm,category,video,tn,fp,fn,tp,bogus\na,c,v,1,2,3,4,5\n";
        assert!(matches!(
            parse_records(extra, InputFormat::CountsCsv, 1e-6),
            Err(IngestError::Schema(_))
        ));
        assert!(matches!(
            parse_records("", InputFormat::CountsCsv, 1e-6),
            Err(IngestError::Schema(_))
        ));
    }

    #[test]
    fn duplicates_rejected() {
        let text = format!("{COUNTS}algoX,baseline,highway,1,1,1,1\n");
        assert!(matches!(
            parse_records(&text, InputFormat::CountsCsv, 1e-6),
            Err(IngestError::Duplicate { line: 3, .. })
        ));
    }

    #[test]
    fn undefined_rates_allowed_for_empty_classes() {
        let text = "algorithm,category,video,prior_pos,fpr,tpr\na,c,v,0,0.25,NA\na,c,w,1,,0.75\n";
        let records = parse_records(text, InputFormat::RocCsv, 1e-6).unwrap();
        assert_eq!(
            records[0].confusion().unwrap().as_array(),
            [0.75, 0.25, 0.0, 0.0]
        );
        assert_eq!(
            records[1].confusion().unwrap().as_array(),
            [0.0, 0.0, 0.25, 0.75]
        );
    }

    fn fixture_row(ppv: f64) -> RocIndicatorRow {
        RocIndicatorRow {
            prior_pos: 0.4,
            fpr: IndicatorValue::Defined(1.0 / 6.0),
            tpr: IndicatorValue::Defined(0.5),
            tau_pos: Some(0.3),
            ppv: Some(IndicatorValue::Defined(ppv)),
        }
    }

    #[test]
    fn consistency_checks() {
        assert_eq!(check_consistency(&fixture_row(2.0 / 3.0), 1e-9), Ok(()));

        let violations = check_consistency(&fixture_row(0.5), 1e-9).unwrap_err();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].field, "ppv");
        let expected = violations[0].expected.value().unwrap();
        assert!((expected - 2.0 / 3.0).abs() < 1e-12);

        let bare = RocIndicatorRow {
            tau_pos: None,
            ppv: None,
            ..fixture_row(0.0)
        };
        assert_eq!(check_consistency(&bare, 0.0), Ok(()));

        let bad_tau = RocIndicatorRow {
            tau_pos: Some(0.5),
            ppv: None,
            ..fixture_row(0.0)
        };
        assert_eq!(
            check_consistency(&bad_tau, 1e-6).unwrap_err()[0].field,
            "tau_pos"
        );
    }

    #[test]
    fn inconsistent_row_rejected_on_read() {
        let text = "algorithm,category,video,prior_pos,fpr,tpr,tau_pos,ppv\na,c,v,0.4,0.1666667,0.5,0.3,0.5\n";
        assert!(matches!(
            parse_records(text, InputFormat::RocCsv, 1e-6),
            Err(IngestError::Inconsistent { line: 2, .. })
        ));
    }

    #[test]
    fn json_records() {
        let text = r#"[
            {"algorithm": "a", "category": "c", "video": "v1", "tn": 50, "fp": 10, "fn": 20, "tp": 20, "size": 100},
            {"algorithm": "a", "category": "c", "video": "v2", "prior_pos": 0, "fpr": 0.25, "tpr": "NA"}
        ]"#;
        let records = parse_records(text, InputFormat::Json, 1e-6).unwrap();
        assert_eq!(
            counts_of(&records[0]),
            ConfusionCounts::new(50, 10, 20, 20).unwrap()
        );
        assert_eq!(records[0].size, Some(100));
        assert_eq!(
            records[1].confusion().unwrap().as_array(),
            [0.75, 0.25, 0.0, 0.0]
        );

        let negative = r#"[{"algorithm": "a", "category": "c", "video": "v", "tn": -1, "fp": 0, "fn": 0, "tp": 1}]"#;
        assert!(matches!(
            parse_records(negative, InputFormat::Json, 1e-6),
            Err(IngestError::Domain { line: 1, .. })
        ));
        assert!(matches!(
            parse_records("{}", InputFormat::Json, 1e-6),
            Err(IngestError::Schema(_))
        ));
    }

    #[test]
    fn sniff_format() {
        assert_eq!(
            InputFormat::sniff(Path::new("x.csv"), COUNTS),
            Some(InputFormat::CountsCsv)
        );
        assert_eq!(
            InputFormat::sniff(
                Path::new("x.csv"),
                "algorithm,category,video,prior_pos,fpr,tpr\n"
            ),
            Some(InputFormat::RocCsv)
        );
        assert_eq!(
            InputFormat::sniff(Path::new("x.json"), ""),
            Some(InputFormat::Json)
        );
    }

    fn arb_counts_records() -> impl Strategy<Value = Vec<EvaluationRecord>> {
        prop::collection::vec(
            (
                1u64..u32::MAX as u64,
                0u64..1_000_000,
                0u64..1_000_000,
                0u64..1_000_000,
                prop::option::of(1u64..1 << 40),
            ),
            1..8,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (tn, fp, fn_, tp, size))| EvaluationRecord {
                    algorithm: "alg, \"quoted\"".into(),
                    category: format!("cat{}", i % 2),
                    video_id: format!("v{i}"),
                    payload: Payload::Counts(ConfusionCounts::new(tn, fp, fn_, tp).unwrap()),
                    size,
                    line: 0,
                })
                .collect()
        })
    }

    fn arb_roc_records() -> impl Strategy<Value = Vec<EvaluationRecord>> {
        prop::collection::vec(
            (0.001f64..0.999, 0.0f64..=1.0, 0.0f64..=1.0, any::<bool>()),
            1..8,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (prior, fpr, tpr, redundant))| {
                    let tau = (1.0 - prior) * fpr + prior * tpr;
                    EvaluationRecord {
                        algorithm: "a".into(),
                        category: String::new(),
                        video_id: format!("v{i}"),
                        payload: Payload::Roc(RocIndicatorRow {
                            prior_pos: prior,
                            fpr: IndicatorValue::Defined(fpr),
                            tpr: IndicatorValue::Defined(tpr),
                            tau_pos: redundant.then_some(tau),
                            ppv: redundant.then(|| IndicatorValue::ratio(prior * tpr, tau)),
                        }),
                        size: None,
                        line: 0,
                    }
                })
                .collect()
        })
    }

    fn strip_lines(records: &[EvaluationRecord]) -> Vec<EvaluationRecord> {
        records
            .iter()
            .cloned()
            .map(|r| EvaluationRecord { line: 0, ..r })
            .collect()
    }

    proptest! {
        #[test]
        fn counts_round_trip(records in arb_counts_records(), json in any::<bool>()) {
            let format = if json { InputFormat::Json } else { InputFormat::CountsCsv };
            let mut buf = Vec::new();
            write_records(&records, format, &mut buf).unwrap();
            let back = parse_records(std::str::from_utf8(&buf).unwrap(), format, 1e-9).unwrap();
            prop_assert_eq!(strip_lines(&back), records);
        }

        #[test]
        fn roc_round_trip(records in arb_roc_records(), json in any::<bool>()) {
            let format = if json { InputFormat::Json } else { InputFormat::RocCsv };
            let mut buf = Vec::new();
            write_records(&records, format, &mut buf).unwrap();
            let back = parse_records(std::str::from_utf8(&buf).unwrap(), format, 1e-9).unwrap();
            prop_assert_eq!(strip_lines(&back), records);
        }
    }
}
