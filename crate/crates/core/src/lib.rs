//! Per-source two-class classification indicators and their coherent
//! summarization across many sources.
//!
//! Sources (typically videos) are reduced to normalized confusions, mixed
//! with a weight distribution over sources, and every summarized indicator
//! is derived from the mixture. The legacy nested arithmetic mean is kept
//! alongside for comparison, together with ROC/PR conversions, ranking and
//! report writers.

pub mod indicators;
pub mod ingest;
pub mod report;
pub mod spaces;
pub mod summarizer;

pub use indicators::{
    confusion_from_roc, indicator_value, normalize, unconditional_value, ConfusionCounts,
    DerivedIndicator, IndicatorError, IndicatorSpec, IndicatorValue, NormalizedConfusion, Outcome,
    OutcomeSet,
};
pub use spaces::{min_achievable_precision, pr_to_roc, roc_to_pr, PrPoint, RocPoint, SpaceError};
pub use summarizer::{
    make_weights, rank_algorithms, summarize, summarize_conditional, summarize_legacy_mean,
    summarize_unconditional, RankedEntry, SourceRecord, SourceSet, SummarizeError, Summary,
    UndefinedPolicy, WeightScheme, WeightVector,
};
