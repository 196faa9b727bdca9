//! Run configuration, comparison reports and their serialization.
//!
//! Every report row carries its procedure: `ours` (the summarized outcome
//! distribution) or `legacy` (nested arithmetic means). Reals are written
//! with shortest round-trip formatting, undefined values as `NA`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::indicators::{IndicatorError, IndicatorSpec, IndicatorValue, NormalizedConfusion};
use crate::ingest::{
    ingest_manifest, read_records, write_records, EvaluationRecord, IngestError, InputFormat,
    Payload,
};
use crate::spaces::{pr_to_roc, roc_to_pr, PrPoint, RocPoint, SpaceError};
use crate::summarizer::{
    make_weights, rank_algorithms, summarize, summarize_legacy_mean, SourceSet, SummarizeError,
    UndefinedPolicy, WeightScheme,
};

#[derive(Debug, Error)]
pub enum ReportError {
    /// Bad arguments or configuration.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("algorithm '{algorithm}': {source}")]
    Summarize {
        algorithm: String,
        #[source]
        source: SummarizeError,
    },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ReportError {
    /// Usage/configuration errors as opposed to data errors.
    pub fn is_usage(&self) -> bool {
        matches!(self, ReportError::Config(_))
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        ReportError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Procedure {
    Ours,
    Legacy,
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Procedure::Ours => "ours",
            Procedure::Legacy => "legacy",
        })
    }
}

impl FromStr for Procedure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ours" => Ok(Procedure::Ours),
            "legacy" => Ok(Procedure::Legacy),
            other => Err(format!(
                "unknown procedure '{other}' (expected ours|legacy)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputFormat {
    Csv,
    Json,
    TsvPlot,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "tsv-plot" | "tsv" => Ok(OutputFormat::TsvPlot),
            other => Err(format!(
                "unknown output format '{other}' (expected csv|json|tsv-plot)"
            )),
        }
    }
}

/// `--weights` selection; `file:<path>` points at a `video,weight` CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSelection {
    Uniform,
    Size,
    Hierarchical,
    File(PathBuf),
}

impl FromStr for WeightSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err("weights file path is empty".into());
            }
            return Ok(WeightSelection::File(PathBuf::from(path)));
        }
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(WeightSelection::Uniform),
            "size" => Ok(WeightSelection::Size),
            "hierarchical" => Ok(WeightSelection::Hierarchical),
            other => Err(format!(
                "unknown weights '{other}' (expected uniform|size|hierarchical|file:<path>)"
            )),
        }
    }
}

impl WeightSelection {
    pub fn load(&self) -> Result<WeightScheme, ReportError> {
        Ok(match self {
            WeightSelection::Uniform => WeightScheme::Uniform,
            WeightSelection::Size => WeightScheme::SizeProportional,
            WeightSelection::Hierarchical => WeightScheme::CategoryHierarchical,
            WeightSelection::File(path) => WeightScheme::Explicit(read_weights_file(path)?),
        })
    }

    fn label(&self) -> String {
        match self {
            WeightSelection::Uniform => "uniform".into(),
            WeightSelection::Size => "size".into(),
            WeightSelection::Hierarchical => "hierarchical".into(),
            WeightSelection::File(p) => format!("file:{}", p.display()),
        }
    }
}

/// Reads explicit weights from a `video,weight` CSV.
pub fn read_weights_file(path: &Path) -> Result<BTreeMap<String, f64>, ReportError> {
    let text = fs::read_to_string(path).map_err(|e| ReportError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::Schema(e.to_string()))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect();
    if header != ["video", "weight"] {
        return Err(IngestError::Schema(format!(
            "{}: weights header must be 'video,weight'",
            path.display()
        ))
        .into());
    }
    let mut weights = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| IngestError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let weight: f64 = row[1].parse().map_err(|_| IngestError::Parse {
            line,
            reason: format!("weight '{}' is not a number", &row[1]),
        })?;
        if weights.insert(row[0].to_string(), weight).is_some() {
            return Err(IngestError::Parse {
                line,
                reason: format!("duplicate weight for video '{}'", &row[0]),
            }
            .into());
        }
    }
    Ok(weights)
}

/// Splits a comma-separated indicator list, keeping `{..}` sets intact.
pub fn parse_indicator_list(list: &str) -> Result<Vec<IndicatorSpec>, IndicatorError> {
    let mut items = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for ch in list.chars() {
        match ch {
            '{' => depth += 1,
            '}' => depth = depth.saturating_sub(1),
            _ => {}
        }
        if ch == ',' && depth == 0 {
            items.push(std::mem::take(&mut current));
        } else {
            current.push(ch);
        }
    }
    items.push(current);
    items
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse())
        .collect()
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    /// Guessed from the file when absent.
    pub input_format: Option<InputFormat>,
    pub weights: WeightSelection,
    pub indicators: Vec<IndicatorSpec>,
    pub procedures: Vec<Procedure>,
    pub undefined_policy: UndefinedPolicy,
    /// Indicator used for the rank columns.
    pub rank_by: IndicatorSpec,
    pub out_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            input_format: None,
            weights: WeightSelection::Uniform,
            indicators: vec![IndicatorSpec::F],
            procedures: vec![Procedure::Ours, Procedure::Legacy],
            undefined_policy: UndefinedPolicy::Skip,
            rank_by: IndicatorSpec::F,
            out_dir: out_dir.into(),
            formats: vec![OutputFormat::Csv],
        }
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.procedures.is_empty() {
            return Err(ReportError::Config(
                "at least one procedure is required".into(),
            ));
        }
        if self.indicators.is_empty() {
            return Err(ReportError::Config(
                "at least one indicator is required".into(),
            ));
        }
        Ok(())
    }

    pub fn load_records(&self) -> Result<Vec<EvaluationRecord>, ReportError> {
        let format = match self.input_format {
            Some(f) => f,
            None => {
                let text =
                    fs::read_to_string(&self.input).map_err(|e| ReportError::io(&self.input, e))?;
                InputFormat::sniff(&self.input, &text).ok_or_else(|| {
                    ReportError::Config(format!(
                        "cannot tell the format of {}; pass --input-format",
                        self.input.display()
                    ))
                })?
            }
        };
        read_records(&self.input, format)
            .map_err(|e| e.context(self.input.display().to_string()).into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OursResult {
    pub confusion: NormalizedConfusion,
    pub values: Vec<IndicatorValue>,
    pub rank_value: IndicatorValue,
    pub rank: usize,
    pub prior_pos: f64,
    pub fpr: IndicatorValue,
    pub tpr: IndicatorValue,
    pub ppv: IndicatorValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegacyResult {
    pub values: Vec<IndicatorValue>,
    pub rank_value: IndicatorValue,
    pub rank: usize,
    pub fpr: IndicatorValue,
    pub tpr: IndicatorValue,
    pub ppv: IndicatorValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmRow {
    pub algorithm: String,
    pub videos: usize,
    pub ours: Option<OursResult>,
    pub legacy: Option<LegacyResult>,
    /// |ours − legacy| per indicator, when both procedures ran.
    pub abs_diff: Option<Vec<IndicatorValue>>,
    pub rank_discordant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub weight_scheme: String,
    pub undefined_policy: String,
    pub source_digest: String,
    pub indicators: Vec<IndicatorSpec>,
    pub rank_by: IndicatorSpec,
    pub procedures: Vec<Procedure>,
    /// Plot hint: FPR values concentrate near zero.
    pub fpr_axis: &'static str,
    pub rows: Vec<AlgorithmRow>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// SHA-256 over a canonical rendering of the records, in input order.
pub fn source_digest(records: &[EvaluationRecord]) -> String {
    let mut hasher = Sha256::new();
    for r in records {
        let payload = match &r.payload {
            Payload::Counts(c) => format!(
                "counts:{}:{}:{}:{}",
                c.true_neg, c.false_pos, c.false_neg, c.true_pos
            ),
            Payload::Roc(row) => format!(
                "roc:{}:{}:{}:{:?}:{:?}",
                row.prior_pos,
                row.fpr,
                row.tpr,
                row.tau_pos,
                row.ppv.map(|p| p.to_string())
            ),
        };
        let line = format!(
            "{}\x1f{}\x1f{}\x1f{}\x1f{:?}\n",
            r.algorithm, r.category, r.video_id, payload, r.size
        );
        hasher.update(line.as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// Groups records by algorithm, keeping first-appearance order.
pub fn group_by_algorithm(
    records: &[EvaluationRecord],
) -> Result<IndexMap<String, SourceSet>, ReportError> {
    let mut grouped: IndexMap<String, Vec<&EvaluationRecord>> = IndexMap::new();
    for r in records {
        grouped.entry(r.algorithm.clone()).or_default().push(r);
    }
    grouped
        .into_iter()
        .map(|(algorithm, rs)| {
            let sources = rs
                .iter()
                .map(|r| r.to_source())
                .collect::<Result<Vec<_>, _>>()?;
            let set = SourceSet::new(sources).map_err(|source| ReportError::Summarize {
                algorithm: algorithm.clone(),
                source,
            })?;
            Ok((algorithm, set))
        })
        .collect()
}

fn legacy_value(
    set: &SourceSet,
    spec: &IndicatorSpec,
    policy: UndefinedPolicy,
) -> Result<IndicatorValue, SummarizeError> {
    match summarize_legacy_mean(set, spec, policy) {
        Err(SummarizeError::NoDefinedValues(_)) => Ok(IndicatorValue::Undefined),
        other => other,
    }
}

/// Runs the configured procedures on every algorithm of `records`.
pub fn build_report(
    records: &[EvaluationRecord],
    config: &RunConfig,
) -> Result<ComparisonReport, ReportError> {
    config.validate()?;
    let scheme = config.weights.load()?;
    let groups = group_by_algorithm(records)?;
    let run_ours = config.procedures.contains(&Procedure::Ours);
    let run_legacy = config.procedures.contains(&Procedure::Legacy);
    let mut warnings = Vec::new();

    let mut rows = Vec::with_capacity(groups.len());
    for (algorithm, set) in &groups {
        let context = |source| ReportError::Summarize {
            algorithm: algorithm.clone(),
            source,
        };
        let ours = if run_ours {
            let weights = make_weights(set, &scheme).map_err(context)?;
            if weights.was_renormalized() {
                warnings.push(format!(
                    "algorithm '{algorithm}': explicit weights did not sum to 1 and were renormalized"
                ));
            }
            let summary = summarize(set, &weights).with_indicators(&config.indicators);
            Some(OursResult {
                confusion: *summary.confusion(),
                values: config.indicators.iter().map(|s| summary.value(s)).collect(),
                rank_value: summary.value(&config.rank_by),
                rank: 0,
                prior_pos: summary.confusion().prior_pos(),
                fpr: summary.value(&IndicatorSpec::FPR),
                tpr: summary.value(&IndicatorSpec::TPR),
                ppv: summary.value(&IndicatorSpec::PPV),
            })
        } else {
            None
        };
        let legacy = if run_legacy {
            let value = |spec: &IndicatorSpec| {
                legacy_value(set, spec, config.undefined_policy).map_err(context)
            };
            Some(LegacyResult {
                values: config
                    .indicators
                    .iter()
                    .map(value)
                    .collect::<Result<Vec<_>, _>>()?,
                rank_value: value(&config.rank_by)?,
                rank: 0,
                fpr: value(&IndicatorSpec::FPR)?,
                tpr: value(&IndicatorSpec::TPR)?,
                ppv: value(&IndicatorSpec::PPV)?,
            })
        } else {
            None
        };
        let abs_diff = match (&ours, &legacy) {
            (Some(o), Some(l)) => Some(
                o.values
                    .iter()
                    .zip(&l.values)
                    .map(|(a, b)| match (a.value(), b.value()) {
                        (Some(a), Some(b)) => IndicatorValue::Defined((a - b).abs()),
                        _ => IndicatorValue::Undefined,
                    })
                    .collect(),
            ),
            _ => None,
        };
        rows.push(AlgorithmRow {
            algorithm: algorithm.clone(),
            videos: set.len(),
            ours,
            legacy,
            abs_diff,
            rank_discordant: None,
        });
    }

    let descending = config.rank_by.higher_is_better();
    if run_ours {
        let ranks = ranks_of(
            rows.iter()
                .map(|r| (r.algorithm.as_str(), r.ours.as_ref().unwrap().rank_value)),
            descending,
        );
        for row in &mut rows {
            row.ours.as_mut().unwrap().rank = ranks.get(&row.algorithm).copied().unwrap_or(0);
        }
    }
    if run_legacy {
        let ranks = ranks_of(
            rows.iter()
                .map(|r| (r.algorithm.as_str(), r.legacy.as_ref().unwrap().rank_value)),
            descending,
        );
        for row in &mut rows {
            row.legacy.as_mut().unwrap().rank = ranks.get(&row.algorithm).copied().unwrap_or(0);
        }
    }
    for row in &mut rows {
        if let (Some(o), Some(l)) = (&row.ours, &row.legacy) {
            row.rank_discordant = Some(o.rank != l.rank);
        }
    }

    Ok(ComparisonReport {
        weight_scheme: config.weights.label(),
        undefined_policy: format!("{:?}", config.undefined_policy).to_ascii_lowercase(),
        source_digest: source_digest(records),
        indicators: config.indicators.clone(),
        rank_by: config.rank_by,
        procedures: config.procedures.clone(),
        fpr_axis: "log",
        rows,
        warnings,
    })
}

/// Dense ranks by name; rank 0 when nothing is defined.
fn ranks_of<'a, I>(values: I, descending: bool) -> BTreeMap<String, usize>
where
    I: IntoIterator<Item = (&'a str, IndicatorValue)>,
{
    rank_algorithms(values, descending)
        .map(|ranked| ranked.into_iter().map(|e| (e.algorithm, e.rank)).collect())
        .unwrap_or_default()
}

fn na_or<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn csv_bytes(rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut out = csv::Writer::from_writer(Vec::new());
    for row in rows {
        out.write_record(&row).expect("in-memory CSV write");
    }
    out.into_inner().expect("in-memory CSV flush")
}

/// `summary.csv`: one row per algorithm and procedure.
pub fn summary_csv(report: &ComparisonReport) -> Vec<u8> {
    let mut header: Vec<String> = ["procedure", "algorithm", "p_tn", "p_fp", "p_fn", "p_tp"]
        .map(String::from)
        .to_vec();
    header.extend(report.indicators.iter().map(|s| s.to_string()));
    header.push(format!("rank_value_{}", report.rank_by));
    header.push("rank".into());

    let mut rows = vec![header];
    for procedure in &report.procedures {
        for row in &report.rows {
            let mut line = vec![procedure.to_string(), row.algorithm.clone()];
            match procedure {
                Procedure::Ours => {
                    let o = row.ours.as_ref().expect("ours ran");
                    line.extend(o.confusion.as_array().iter().map(|p| p.to_string()));
                    line.extend(o.values.iter().map(|v| v.to_string()));
                    line.push(o.rank_value.to_string());
                    line.push(o.rank.to_string());
                }
                Procedure::Legacy => {
                    let l = row.legacy.as_ref().expect("legacy ran");
                    line.extend(std::iter::repeat_n("NA".to_string(), 4));
                    line.extend(l.values.iter().map(|v| v.to_string()));
                    line.push(l.rank_value.to_string());
                    line.push(l.rank.to_string());
                }
            }
            rows.push(line);
        }
    }
    csv_bytes(rows)
}

/// `comparison.csv`: per algorithm and indicator, both procedures side by side.
pub fn comparison_csv(report: &ComparisonReport) -> Option<Vec<u8>> {
    let mut rows = vec![["algorithm", "indicator", "ours", "legacy", "abs_diff"]
        .map(String::from)
        .to_vec()];
    for row in &report.rows {
        let (Some(o), Some(l), Some(d)) = (&row.ours, &row.legacy, &row.abs_diff) else {
            return None;
        };
        for (i, spec) in report.indicators.iter().enumerate() {
            rows.push(vec![
                row.algorithm.clone(),
                spec.to_string(),
                o.values[i].to_string(),
                l.values[i].to_string(),
                d[i].to_string(),
            ]);
        }
    }
    Some(csv_bytes(rows))
}

/// Plot data for one procedure and one space: `label\tx\ty` rows.
pub fn plot_tsv(report: &ComparisonReport, procedure: Procedure, space: &str) -> Vec<u8> {
    let (x_name, y_name) = match space {
        "roc" => ("fpr", "tpr"),
        _ => ("recall", "precision"),
    };
    let mut out = String::new();
    out.push_str(&format!(
        "# procedure={procedure} space={space} x={x_name} y={y_name} weights={}",
        report.weight_scheme
    ));
    if space == "roc" {
        out.push_str(&format!(" x_axis={}", report.fpr_axis));
    }
    out.push('\n');
    out.push_str("label\tx\ty\n");
    for row in &report.rows {
        let (fpr, tpr, ppv) = match procedure {
            Procedure::Ours => {
                let o = row.ours.as_ref().expect("ours ran");
                (o.fpr, o.tpr, o.ppv)
            }
            Procedure::Legacy => {
                let l = row.legacy.as_ref().expect("legacy ran");
                (l.fpr, l.tpr, l.ppv)
            }
        };
        let (x, y) = if space == "roc" {
            (fpr, tpr)
        } else {
            (tpr, ppv)
        };
        out.push_str(&format!("{}\t{x}\t{y}\n", row.algorithm));
    }
    out.into_bytes()
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, ReportError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| ReportError::io(&path, e))?;
    Ok(path)
}

/// Pretty-printed JSON form of the report, newline-terminated.
pub fn report_json(report: &ComparisonReport) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(report).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

/// Writes the requested formats into `out_dir`; returns the files written.
pub fn write_report(
    report: &ComparisonReport,
    out_dir: &Path,
    formats: &[OutputFormat],
) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(out_dir).map_err(|e| ReportError::io(out_dir, e))?;
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut written = Vec::new();
    for format in formats {
        match format {
            OutputFormat::Csv => {
                written.push(write_file(out_dir, "summary.csv", &summary_csv(report))?);
                if let Some(bytes) = comparison_csv(report) {
                    written.push(write_file(out_dir, "comparison.csv", &bytes)?);
                }
            }
            OutputFormat::Json => {
                written.push(write_file(out_dir, "report.json", &report_json(report))?);
            }
            OutputFormat::TsvPlot => {
                for procedure in &report.procedures {
                    for space in ["roc", "pr"] {
                        let name = format!("{space}_{procedure}.tsv");
                        written.push(write_file(
                            out_dir,
                            &name,
                            &plot_tsv(report, *procedure, space),
                        )?);
                    }
                }
            }
        }
    }
    Ok(written)
}

/// Loads the input, builds the report and writes it.
pub fn cmd_summarize(config: &RunConfig) -> Result<(ComparisonReport, Vec<PathBuf>), ReportError> {
    config.validate()?;
    let records = config.load_records()?;
    let report = build_report(&records, config)?;
    let written = write_report(&report, &config.out_dir, &config.formats)?;
    Ok((report, written))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub algorithm: String,
    pub ours: Option<(IndicatorValue, usize)>,
    pub legacy: Option<(IndicatorValue, usize)>,
    pub discordant: bool,
}

/// Per-procedure dense ranks with a discordance flag per algorithm.
/// Algorithms keep the order of `algorithms`.
pub fn rank_table(
    algorithms: &[String],
    ours: Option<&BTreeMap<String, IndicatorValue>>,
    legacy: Option<&BTreeMap<String, IndicatorValue>>,
    descending: bool,
) -> Result<Vec<RankRow>, ReportError> {
    if algorithms.len() < 2 {
        return Err(ReportError::Config(
            "ranking needs at least two algorithms".into(),
        ));
    }
    let rank = |values: Option<&BTreeMap<String, IndicatorValue>>| {
        values
            .map(|v| {
                rank_algorithms(v.iter().map(|(k, x)| (k.as_str(), *x)), descending)
                    .map(|ranked| {
                        ranked
                            .into_iter()
                            .map(|e| (e.algorithm, (e.value, e.rank)))
                            .collect::<BTreeMap<_, _>>()
                    })
                    .map_err(|source| ReportError::Summarize {
                        algorithm: "*".into(),
                        source,
                    })
            })
            .transpose()
    };
    let ours_ranks = rank(ours)?;
    let legacy_ranks = rank(legacy)?;
    Ok(algorithms
        .iter()
        .map(|a| {
            let o = ours_ranks.as_ref().and_then(|m| m.get(a).copied());
            let l = legacy_ranks.as_ref().and_then(|m| m.get(a).copied());
            let discordant = matches!((o, l), (Some((_, x)), Some((_, y))) if x != y);
            RankRow {
                algorithm: a.clone(),
                ours: o,
                legacy: l,
                discordant,
            }
        })
        .collect())
}

/// Rank rows straight from a comparison report.
pub fn rank_report(report: &ComparisonReport) -> Result<Vec<RankRow>, ReportError> {
    let algorithms: Vec<String> = report.rows.iter().map(|r| r.algorithm.clone()).collect();
    let ours: Option<BTreeMap<String, IndicatorValue>> =
        report.procedures.contains(&Procedure::Ours).then(|| {
            report
                .rows
                .iter()
                .map(|r| (r.algorithm.clone(), r.ours.as_ref().unwrap().rank_value))
                .collect()
        });
    let legacy: Option<BTreeMap<String, IndicatorValue>> =
        report.procedures.contains(&Procedure::Legacy).then(|| {
            report
                .rows
                .iter()
                .map(|r| (r.algorithm.clone(), r.legacy.as_ref().unwrap().rank_value))
                .collect()
        });
    rank_table(
        &algorithms,
        ours.as_ref(),
        legacy.as_ref(),
        report.rank_by.higher_is_better(),
    )
}

/// Precomputed per-algorithm values; a column is `None` when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub algorithms: Vec<String>,
    pub ours: Option<BTreeMap<String, IndicatorValue>>,
    pub legacy: Option<BTreeMap<String, IndicatorValue>>,
}

/// Reads an `algorithm,ours,legacy` table of precomputed values; either
/// value column may be omitted.
pub fn read_value_table(path: &Path) -> Result<ValueTable, ReportError> {
    let text = fs::read_to_string(path).map_err(|e| ReportError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::Schema(e.to_string()))?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let algo_col = col("algorithm")
        .ok_or_else(|| IngestError::Schema("value table needs an 'algorithm' column".into()))?;
    let ours_col = col("ours");
    let legacy_col = col("legacy");
    if ours_col.is_none() && legacy_col.is_none() {
        return Err(
            IngestError::Schema("value table needs an 'ours' or 'legacy' column".into()).into(),
        );
    }
    if let Some(extra) = header
        .iter()
        .find(|h| !["algorithm", "ours", "legacy"].contains(&h.as_str()))
    {
        return Err(IngestError::Schema(format!("unexpected column '{extra}'")).into());
    }

    let mut algorithms = Vec::new();
    let mut ours = BTreeMap::new();
    let mut legacy = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| IngestError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let value = |idx: usize| -> Result<IndicatorValue, ReportError> {
            let raw = &row[idx];
            if raw.is_empty() || raw.eq_ignore_ascii_case("na") {
                return Ok(IndicatorValue::Undefined);
            }
            raw.parse::<f64>()
                .map(IndicatorValue::Defined)
                .map_err(|_| {
                    IngestError::Parse {
                        line,
                        reason: format!("'{raw}' is not a number"),
                    }
                    .into()
                })
        };
        let name = row[algo_col].to_string();
        if algorithms.contains(&name) {
            return Err(IngestError::Parse {
                line,
                reason: format!("duplicate algorithm '{name}'"),
            }
            .into());
        }
        if let Some(c) = ours_col {
            ours.insert(name.clone(), value(c)?);
        }
        if let Some(c) = legacy_col {
            legacy.insert(name.clone(), value(c)?);
        }
        algorithms.push(name);
    }
    Ok(ValueTable {
        algorithms,
        ours: ours_col.map(|_| ours),
        legacy: legacy_col.map(|_| legacy),
    })
}

pub fn rank_csv(rows: &[RankRow]) -> Vec<u8> {
    let mut out = vec![[
        "algorithm",
        "ours_value",
        "ours_rank",
        "legacy_value",
        "legacy_rank",
        "discordant",
    ]
    .map(String::from)
    .to_vec()];
    for r in rows {
        out.push(vec![
            r.algorithm.clone(),
            na_or(r.ours.map(|(v, _)| v)),
            na_or(r.ours.map(|(_, k)| k)),
            na_or(r.legacy.map(|(v, _)| v)),
            na_or(r.legacy.map(|(_, k)| k)),
            r.discordant.to_string(),
        ]);
    }
    csv_bytes(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    RocToPr,
    PrToRoc,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "roc-to-pr" | "roc2pr" => Ok(Direction::RocToPr),
            "pr-to-roc" | "pr2roc" => Ok(Direction::PrToRoc),
            other => Err(format!(
                "unknown direction '{other}' (expected roc-to-pr|pr-to-roc)"
            )),
        }
    }
}

/// Converts `(x, y)` between spaces. ROC points are `(fpr, tpr)` and PR
/// points `(recall, precision)`; the result is printed as `x,y`.
pub fn cmd_convert(
    direction: Direction,
    x: f64,
    y: f64,
    prior_pos: f64,
) -> Result<String, ReportError> {
    match direction {
        Direction::RocToPr => {
            let pr = roc_to_pr(RocPoint::new(x, y)?, prior_pos)?;
            Ok(match pr {
                Some(p) => format!("{},{}", p.recall, p.precision),
                None => format!("{y},NA"),
            })
        }
        Direction::PrToRoc => {
            let roc = pr_to_roc(PrPoint::new(x, y)?, prior_pos)?;
            Ok(format!("{},{}", roc.fpr, roc.tpr))
        }
    }
}

/// Counts every manifest entry and writes a counts CSV with a size column.
pub fn cmd_ingest_masks(
    manifest: &Path,
    out: &Path,
    default_algorithm: Option<&str>,
) -> Result<Vec<EvaluationRecord>, ReportError> {
    let records = ingest_manifest(manifest, default_algorithm)
        .map_err(|e| e.context(manifest.display().to_string()))?;
    let mut bytes = Vec::new();
    write_records(&records, InputFormat::CountsCsv, &mut bytes)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| ReportError::io(parent, e))?;
    }
    let mut file = fs::File::create(out).map_err(|e| ReportError::io(out, e))?;
    file.write_all(&bytes)
        .map_err(|e| ReportError::io(out, e))?;
    Ok(records)
}
