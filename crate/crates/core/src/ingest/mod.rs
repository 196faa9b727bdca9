//! Loading per-video evaluation data: counts or ROC-style CSV tables, JSON
//! record lists, and pixel counting from paired ground-truth/prediction
//! graymaps.

mod masks;
mod pgm;
mod records;

pub use masks::{
    count_from_masks, count_video, ingest_manifest, LabelMapping, ManifestEntry, MappingOverrides,
    MaskTally, VideoCounts,
};
pub use pgm::{read_pgm, GrayImage};
pub use records::{
    check_consistency, parse_records, read_records, write_records, ConsistencyViolation,
    EvaluationRecord, InputFormat, Payload, RocIndicatorRow, DEFAULT_CONSISTENCY_TOLERANCE,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::indicators::IndicatorError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("line {line}: {reason}")]
    Domain { line: u64, reason: String },
    #[error("line {line}: inconsistent redundant fields: {}", format_violations(.violations))]
    Inconsistent {
        line: u64,
        violations: Vec<ConsistencyViolation>,
    },
    #[error("line {line}: duplicate record for algorithm '{algorithm}', video '{video}'")]
    Duplicate {
        line: u64,
        algorithm: String,
        video: String,
    },
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("unmapped ground-truth label {value} at ({x}, {y})")]
    UnmappedLabel { value: u8, x: usize, y: usize },
    #[error("invalid label mapping: {0}")]
    Mapping(String),
    #[error("invalid graymap: {0}")]
    Image(String),
    #[error("frame stems do not pair up: {0}")]
    UnmatchedFrames(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<IngestError>,
    },
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
}

impl IngestError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        IngestError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

fn format_violations(violations: &[ConsistencyViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
