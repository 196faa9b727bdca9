//! ROC and precision-recall geometry.
//!
//! For a fixed positive prior the two spaces are in bijection. PR points
//! below `min_achievable_precision` have no ROC preimage.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("invalid prior {0}")]
    InvalidPrior(f64),
    #[error("coordinate {name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("precision is zero; the ROC preimage is not determined")]
    ZeroPrecision,
    #[error("PR point is unachievable at this prior: implied FPR = {implied_fpr}")]
    Achievability { implied_fpr: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

fn unit(name: &'static str, value: f64) -> Result<f64, SpaceError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(SpaceError::OutOfRange { name, value })
    }
}

impl RocPoint {
    pub fn new(fpr: f64, tpr: f64) -> Result<Self, SpaceError> {
        Ok(RocPoint {
            fpr: unit("fpr", fpr)?,
            tpr: unit("tpr", tpr)?,
        })
    }
}

impl PrPoint {
    pub fn new(recall: f64, precision: f64) -> Result<Self, SpaceError> {
        Ok(PrPoint {
            recall: unit("recall", recall)?,
            precision: unit("precision", precision)?,
        })
    }
}

/// Maps a ROC point to PR space. `Ok(None)` when precision is undefined
/// (no positive predictions: `fpr = tpr = 0`).
pub fn roc_to_pr(p: RocPoint, prior_pos: f64) -> Result<Option<PrPoint>, SpaceError> {
    if !(prior_pos > 0.0 && prior_pos <= 1.0) {
        return Err(SpaceError::InvalidPrior(prior_pos));
    }
    let prior_neg = 1.0 - prior_pos;
    let true_pos_mass = prior_pos * p.tpr;
    let denominator = prior_neg * p.fpr + true_pos_mass;
    if denominator <= 0.0 {
        return Ok(None);
    }
    Ok(Some(PrPoint {
        recall: p.tpr,
        precision: (true_pos_mass / denominator).min(1.0),
    }))
}

/// Inverse of [`roc_to_pr`] for a non-degenerate prior.
pub fn pr_to_roc(p: PrPoint, prior_pos: f64) -> Result<RocPoint, SpaceError> {
    if !(prior_pos > 0.0 && prior_pos < 1.0) {
        return Err(SpaceError::InvalidPrior(prior_pos));
    }
    if p.precision <= 0.0 {
        return Err(SpaceError::ZeroPrecision);
    }
    let prior_neg = 1.0 - prior_pos;
    let fpr = prior_pos * p.recall * (1.0 - p.precision) / (prior_neg * p.precision);
    if fpr > 1.0 {
        return Err(SpaceError::Achievability { implied_fpr: fpr });
    }
    Ok(RocPoint { fpr, tpr: p.recall })
}

/// Lowest precision any classifier can reach at this prior and recall,
/// attained at `fpr = 1`.
pub fn min_achievable_precision(prior_pos: f64, recall: f64) -> f64 {
    if recall <= 0.0 {
        return 0.0;
    }
    let mass = prior_pos * recall;
    mass / (mass + (1.0 - prior_pos))
}

/// Whether a PR point lies on or above the achievable boundary.
pub fn is_achievable(p: PrPoint, prior_pos: f64, tolerance: f64) -> bool {
    p.precision >= min_achievable_precision(prior_pos, p.recall) - tolerance
}
