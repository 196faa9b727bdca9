//! Confusion outcomes, counts, normalized confusion distributions and the
//! family of probabilistic indicators evaluated on them.
//!
//! A probabilistic indicator is `P(outcome ∈ A | outcome ∈ B)` for outcome
//! sets `∅ ⊊ A ⊊ B ⊆ {tn, fp, fn, tp}`. Every classic two-class indicator
//! (prior, rate of positive predictions, FPR, TPR, precision, ...) is one
//! member of the family. A few non-probabilistic indicators (F-score,
//! balanced accuracy, accuracy, Jaccard) are derived from the same four
//! outcome probabilities.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Tolerance on the sum of the four outcome probabilities.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndicatorError {
    #[error("confusion counts are all zero")]
    ZeroTotal,
    #[error("confusion counts overflow a 64-bit total")]
    CountOverflow,
    #[error("probability {name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("outcome probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("invalid indicator sets {a}|{b}: require ∅ ⊊ A ⊊ B")]
    InvalidSets { a: OutcomeSet, b: OutcomeSet },
    #[error("missing indicator: {0} is undefined but required")]
    MissingIndicator(&'static str),
    #[error("cannot parse indicator '{0}'")]
    Parse(String),
}

/// One of the four outcomes of comparing a ground-truth class with a
/// predicted class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    TrueNegative,
    FalsePositive,
    FalseNegative,
    TruePositive,
}

impl Outcome {
    /// All outcomes in serialization order.
    pub const ALL: [Outcome; 4] = [
        Outcome::TrueNegative,
        Outcome::FalsePositive,
        Outcome::FalseNegative,
        Outcome::TruePositive,
    ];

    pub const fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Outcome::TrueNegative => "tn",
            Outcome::FalsePositive => "fp",
            Outcome::FalseNegative => "fn",
            Outcome::TruePositive => "tp",
        }
    }

    /// Outcome for a (ground truth, prediction) pair, `true` meaning positive.
    pub fn from_classes(truth: bool, predicted: bool) -> Outcome {
        match (truth, predicted) {
            (false, false) => Outcome::TrueNegative,
            (false, true) => Outcome::FalsePositive,
            (true, false) => Outcome::FalseNegative,
            (true, true) => Outcome::TruePositive,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Outcome {
    type Err = IndicatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tn" => Ok(Outcome::TrueNegative),
            "fp" => Ok(Outcome::FalsePositive),
            "fn" => Ok(Outcome::FalseNegative),
            "tp" => Ok(Outcome::TruePositive),
            _ => Err(IndicatorError::Parse(s.to_string())),
        }
    }
}

/// A subset of `{tn, fp, fn, tp}` stored as a 4-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OutcomeSet(u8);

impl OutcomeSet {
    pub const EMPTY: OutcomeSet = OutcomeSet(0);
    pub const UNIVERSE: OutcomeSet = OutcomeSet(0b1111);

    pub const TN: OutcomeSet = OutcomeSet(Outcome::TrueNegative.bit());
    pub const FP: OutcomeSet = OutcomeSet(Outcome::FalsePositive.bit());
    pub const FN: OutcomeSet = OutcomeSet(Outcome::FalseNegative.bit());
    pub const TP: OutcomeSet = OutcomeSet(Outcome::TruePositive.bit());

    /// Builds a set from its raw mask; bits above the fourth are dropped.
    pub const fn from_bits(bits: u8) -> OutcomeSet {
        OutcomeSet(bits & 0b1111)
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub fn from_outcomes<I: IntoIterator<Item = Outcome>>(outcomes: I) -> OutcomeSet {
        OutcomeSet(outcomes.into_iter().fold(0, |acc, o| acc | o.bit()))
    }

    pub const fn union(self, other: OutcomeSet) -> OutcomeSet {
        OutcomeSet(self.0 | other.0)
    }

    pub const fn intersection(self, other: OutcomeSet) -> OutcomeSet {
        OutcomeSet(self.0 & other.0)
    }

    pub const fn contains(self, outcome: Outcome) -> bool {
        self.0 & outcome.bit() != 0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn is_universe(self) -> bool {
        self.0 == 0b1111
    }

    pub const fn is_subset_of(self, other: OutcomeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn is_proper_subset_of(self, other: OutcomeSet) -> bool {
        self.is_subset_of(other) && self.0 != other.0
    }

    pub fn iter(self) -> impl Iterator<Item = Outcome> {
        Outcome::ALL.into_iter().filter(move |o| self.contains(*o))
    }

    /// All sixteen subsets, ordered by mask.
    pub fn all() -> impl Iterator<Item = OutcomeSet> {
        (0u8..16).map(OutcomeSet)
    }
}

impl fmt::Display for OutcomeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, o) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(o.symbol())?;
        }
        f.write_str("}")
    }
}

impl FromStr for OutcomeSet {
    type Err = IndicatorError;

    /// Parses `{tp,fn}` style sets; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| IndicatorError::Parse(s.to_string()))?;
        if inner.trim().is_empty() {
            return Ok(OutcomeSet::EMPTY);
        }
        let mut set = OutcomeSet::EMPTY;
        for part in inner.split(',') {
            let outcome: Outcome = part
                .parse()
                .map_err(|_| IndicatorError::Parse(s.to_string()))?;
            set = set.union(OutcomeSet(outcome.bit()));
        }
        Ok(set)
    }
}

/// Raw pixel tallies for one source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ConfusionCounts {
    pub true_neg: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_pos: u64,
}

impl ConfusionCounts {
    /// Fails when the total does not fit in a `u64`.
    pub fn new(
        true_neg: u64,
        false_pos: u64,
        false_neg: u64,
        true_pos: u64,
    ) -> Result<Self, IndicatorError> {
        let counts = ConfusionCounts {
            true_neg,
            false_pos,
            false_neg,
            true_pos,
        };
        counts
            .checked_total()
            .ok_or(IndicatorError::CountOverflow)?;
        Ok(counts)
    }

    pub fn get(&self, outcome: Outcome) -> u64 {
        match outcome {
            Outcome::TrueNegative => self.true_neg,
            Outcome::FalsePositive => self.false_pos,
            Outcome::FalseNegative => self.false_neg,
            Outcome::TruePositive => self.true_pos,
        }
    }

    pub fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::TrueNegative => self.true_neg += 1,
            Outcome::FalsePositive => self.false_pos += 1,
            Outcome::FalseNegative => self.false_neg += 1,
            Outcome::TruePositive => self.true_pos += 1,
        }
    }

    pub fn checked_total(&self) -> Option<u64> {
        self.true_neg
            .checked_add(self.false_pos)?
            .checked_add(self.false_neg)?
            .checked_add(self.true_pos)
    }

    /// Total count. Panics on overflow, which [`ConfusionCounts::new`] rules out.
    pub fn total(&self) -> u64 {
        self.checked_total()
            .expect("confusion count total overflows u64")
    }

    pub fn checked_add(&self, other: &ConfusionCounts) -> Option<ConfusionCounts> {
        let sum = ConfusionCounts {
            true_neg: self.true_neg.checked_add(other.true_neg)?,
            false_pos: self.false_pos.checked_add(other.false_pos)?,
            false_neg: self.false_neg.checked_add(other.false_neg)?,
            true_pos: self.true_pos.checked_add(other.true_pos)?,
        };
        sum.checked_total().map(|_| sum)
    }
}

impl Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, rhs: ConfusionCounts) -> ConfusionCounts {
        self.checked_add(&rhs).expect("confusion counts overflow")
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, rhs: ConfusionCounts) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = ConfusionCounts>>(iter: I) -> ConfusionCounts {
        iter.fold(ConfusionCounts::default(), Add::add)
    }
}

/// The joint distribution of (ground truth, prediction) for one source or
/// one summarized set: four outcome probabilities summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedConfusion {
    pub p_tn: f64,
    pub p_fp: f64,
    pub p_fn: f64,
    pub p_tp: f64,
}

impl NormalizedConfusion {
    pub fn new(p_tn: f64, p_fp: f64, p_fn: f64, p_tp: f64) -> Result<Self, IndicatorError> {
        for (name, value) in [
            ("p_tn", p_tn),
            ("p_fp", p_fp),
            ("p_fn", p_fn),
            ("p_tp", p_tp),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(IndicatorError::OutOfRange { name, value });
            }
        }
        let sum = p_tn + p_fp + p_fn + p_tp;
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(IndicatorError::NotNormalized(sum));
        }
        Ok(NormalizedConfusion {
            p_tn,
            p_fp,
            p_fn,
            p_tp,
        })
    }

    /// Constructor for values that are normalized by construction (convex
    /// combinations of valid confusions).
    pub(crate) fn from_parts(p_tn: f64, p_fp: f64, p_fn: f64, p_tp: f64) -> Self {
        debug_assert!(
            ((p_tn + p_fp + p_fn + p_tp) - 1.0).abs() <= 1e-9,
            "confusion not normalized"
        );
        NormalizedConfusion {
            p_tn,
            p_fp,
            p_fn,
            p_tp,
        }
    }

    pub fn get(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::TrueNegative => self.p_tn,
            Outcome::FalsePositive => self.p_fp,
            Outcome::FalseNegative => self.p_fn,
            Outcome::TruePositive => self.p_tp,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_tn, self.p_fp, self.p_fn, self.p_tp]
    }

    pub fn prior_pos(&self) -> f64 {
        unconditional_value(self, OutcomeSet::FN.union(OutcomeSet::TP))
    }

    pub fn value(&self, spec: &IndicatorSpec) -> IndicatorValue {
        indicator_value(self, spec)
    }
}

/// Divides each count by the total.
pub fn normalize(counts: &ConfusionCounts) -> Result<NormalizedConfusion, IndicatorError> {
    let total = counts
        .checked_total()
        .ok_or(IndicatorError::CountOverflow)?;
    if total == 0 {
        return Err(IndicatorError::ZeroTotal);
    }
    let total = total as f64;
    Ok(NormalizedConfusion::from_parts(
        counts.true_neg as f64 / total,
        counts.false_pos as f64 / total,
        counts.false_neg as f64 / total,
        counts.true_pos as f64 / total,
    ))
}

/// `P(outcome ∈ A)`: the sum of the probabilities of the outcomes in `a`.
pub fn unconditional_value(nc: &NormalizedConfusion, a: OutcomeSet) -> f64 {
    a.iter().map(|o| nc.get(o)).sum()
}

/// An indicator value; `Undefined` arises from a zero-probability
/// conditioning event and is a value, not an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndicatorValue {
    Defined(f64),
    Undefined,
}

impl IndicatorValue {
    pub fn value(self) -> Option<f64> {
        match self {
            IndicatorValue::Defined(v) => Some(v),
            IndicatorValue::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, IndicatorValue::Defined(_))
    }

    /// `numerator / denominator`, undefined when the denominator is zero.
    pub fn ratio(numerator: f64, denominator: f64) -> IndicatorValue {
        if denominator > 0.0 {
            IndicatorValue::Defined((numerator / denominator).clamp(0.0, 1.0))
        } else {
            IndicatorValue::Undefined
        }
    }
}

impl From<Option<f64>> for IndicatorValue {
    fn from(v: Option<f64>) -> Self {
        v.map_or(IndicatorValue::Undefined, IndicatorValue::Defined)
    }
}

/// `NA` for undefined values, shortest round-trip formatting otherwise.
impl fmt::Display for IndicatorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndicatorValue::Defined(v) => write!(f, "{v}"),
            IndicatorValue::Undefined => f.write_str("NA"),
        }
    }
}

impl Serialize for IndicatorValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            IndicatorValue::Defined(v) => serializer.serialize_f64(*v),
            IndicatorValue::Undefined => serializer.serialize_str("NA"),
        }
    }
}

/// Indicators that are not themselves conditional probabilities but are
/// functions of the four outcome probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DerivedIndicator {
    /// F-score, `2·tp / (fp + fn + 2·tp)`.
    FScore,
    /// Balanced accuracy, mean of TNR and TPR.
    BalancedAccuracy,
    Accuracy,
    /// Jaccard index, `tp / (fp + fn + tp)`.
    Jaccard,
}

impl DerivedIndicator {
    pub fn name(self) -> &'static str {
        match self {
            DerivedIndicator::FScore => "F",
            DerivedIndicator::BalancedAccuracy => "BA",
            DerivedIndicator::Accuracy => "ACC",
            DerivedIndicator::Jaccard => "J",
        }
    }
}

/// Either a member `A|B` of the probabilistic family or a derived indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndicatorSpec {
    Probabilistic { a: OutcomeSet, b: OutcomeSet },
    Derived(DerivedIndicator),
}

const fn prob(a: u8, b: u8) -> IndicatorSpec {
    IndicatorSpec::Probabilistic {
        a: OutcomeSet::from_bits(a),
        b: OutcomeSet::from_bits(b),
    }
}

// masks: tn = 1, fp = 2, fn = 4, tp = 8
const TN: u8 = 1;
const FP: u8 = 2;
const FN: u8 = 4;
const TP: u8 = 8;
const ALL: u8 = 15;

impl IndicatorSpec {
    pub const PRIOR_POS: IndicatorSpec = prob(FN | TP, ALL);
    pub const PRIOR_NEG: IndicatorSpec = prob(TN | FP, ALL);
    pub const TAU_POS: IndicatorSpec = prob(FP | TP, ALL);
    pub const TAU_NEG: IndicatorSpec = prob(TN | FN, ALL);
    pub const ER: IndicatorSpec = prob(FP | FN, ALL);
    pub const TNR: IndicatorSpec = prob(TN, TN | FP);
    pub const FPR: IndicatorSpec = prob(FP, TN | FP);
    pub const FNR: IndicatorSpec = prob(FN, FN | TP);
    pub const TPR: IndicatorSpec = prob(TP, FN | TP);
    pub const PPV: IndicatorSpec = prob(TP, FP | TP);
    pub const NPV: IndicatorSpec = prob(TN, TN | FN);
    pub const F: IndicatorSpec = IndicatorSpec::Derived(DerivedIndicator::FScore);
    pub const BA: IndicatorSpec = IndicatorSpec::Derived(DerivedIndicator::BalancedAccuracy);
    pub const ACCURACY: IndicatorSpec = IndicatorSpec::Derived(DerivedIndicator::Accuracy);
    pub const JACCARD: IndicatorSpec = IndicatorSpec::Derived(DerivedIndicator::Jaccard);

    /// The eleven named members of the probabilistic family.
    pub const NAMED_PROBABILISTIC: [IndicatorSpec; 11] = [
        IndicatorSpec::PRIOR_POS,
        IndicatorSpec::PRIOR_NEG,
        IndicatorSpec::TAU_POS,
        IndicatorSpec::TAU_NEG,
        IndicatorSpec::ER,
        IndicatorSpec::TNR,
        IndicatorSpec::FPR,
        IndicatorSpec::FNR,
        IndicatorSpec::TPR,
        IndicatorSpec::PPV,
        IndicatorSpec::NPV,
    ];

    /// Builds `A|B`, enforcing `∅ ⊊ A ⊊ B`.
    pub fn conditional(a: OutcomeSet, b: OutcomeSet) -> Result<IndicatorSpec, IndicatorError> {
        if a.is_empty() || !a.is_proper_subset_of(b) {
            return Err(IndicatorError::InvalidSets { a, b });
        }
        Ok(IndicatorSpec::Probabilistic { a, b })
    }

    /// `A` read as `A|{tn,fp,fn,tp}`.
    pub fn unconditional(a: OutcomeSet) -> Result<IndicatorSpec, IndicatorError> {
        IndicatorSpec::conditional(a, OutcomeSet::UNIVERSE)
    }

    /// Canonical short name for aliased indicators.
    pub fn alias(&self) -> Option<&'static str> {
        const NAMES: [(IndicatorSpec, &str); 11] = [
            (IndicatorSpec::PRIOR_POS, "PI+"),
            (IndicatorSpec::PRIOR_NEG, "PI-"),
            (IndicatorSpec::TAU_POS, "TAU+"),
            (IndicatorSpec::TAU_NEG, "TAU-"),
            (IndicatorSpec::ER, "ER"),
            (IndicatorSpec::TNR, "TNR"),
            (IndicatorSpec::FPR, "FPR"),
            (IndicatorSpec::FNR, "FNR"),
            (IndicatorSpec::TPR, "TPR"),
            (IndicatorSpec::PPV, "PPV"),
            (IndicatorSpec::NPV, "NPV"),
        ];
        match self {
            IndicatorSpec::Derived(d) => Some(d.name()),
            spec => NAMES.iter().find(|(s, _)| s == spec).map(|(_, n)| *n),
        }
    }

    /// Whether larger values mean better performance. Error-type rates
    /// (FPR, FNR, ER) are the exceptions.
    pub fn higher_is_better(&self) -> bool {
        !matches!(
            *self,
            IndicatorSpec::FPR | IndicatorSpec::FNR | IndicatorSpec::ER
        )
    }
}

impl fmt::Display for IndicatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = self.alias() {
            return f.write_str(name);
        }
        match self {
            IndicatorSpec::Probabilistic { a, b } if b.is_universe() => write!(f, "{a}"),
            IndicatorSpec::Probabilistic { a, b } => write!(f, "{a}|{b}"),
            IndicatorSpec::Derived(d) => f.write_str(d.name()),
        }
    }
}

impl Serialize for IndicatorSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for IndicatorSpec {
    type Err = IndicatorError;

    /// Accepts names (`TPR`, `recall`, `F`, ...) or set expressions such as
    /// `{tp}|{fn,tp}` and `{fn,tp}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if trimmed.starts_with('{') {
            return match trimmed.split_once('|') {
                Some((a, b)) => IndicatorSpec::conditional(a.parse()?, b.parse()?),
                None => IndicatorSpec::unconditional(trimmed.parse()?),
            };
        }
        let spec = match trimmed.to_ascii_uppercase().as_str() {
            "PI+" | "PRIOR_POS" | "PRIOR+" => IndicatorSpec::PRIOR_POS,
            "PI-" | "PRIOR_NEG" | "PRIOR-" => IndicatorSpec::PRIOR_NEG,
            "TAU+" | "TAU_POS" => IndicatorSpec::TAU_POS,
            "TAU-" | "TAU_NEG" => IndicatorSpec::TAU_NEG,
            "ER" | "ERROR_RATE" => IndicatorSpec::ER,
            "TNR" | "SPECIFICITY" => IndicatorSpec::TNR,
            "FPR" => IndicatorSpec::FPR,
            "FNR" => IndicatorSpec::FNR,
            "TPR" | "R" | "RECALL" | "SENSITIVITY" => IndicatorSpec::TPR,
            "PPV" | "P" | "PRECISION" => IndicatorSpec::PPV,
            "NPV" => IndicatorSpec::NPV,
            "F" | "F1" | "FSCORE" | "F-SCORE" => IndicatorSpec::F,
            "BA" | "BALANCED_ACCURACY" => IndicatorSpec::BA,
            "A" | "ACC" | "ACCURACY" => IndicatorSpec::ACCURACY,
            "J" | "JACCARD" => IndicatorSpec::JACCARD,
            _ => return Err(IndicatorError::Parse(s.to_string())),
        };
        Ok(spec)
    }
}

/// Evaluates `spec` on a normalized confusion.
pub fn indicator_value(nc: &NormalizedConfusion, spec: &IndicatorSpec) -> IndicatorValue {
    match *spec {
        IndicatorSpec::Probabilistic { a, b } => IndicatorValue::ratio(
            unconditional_value(nc, a.intersection(b)),
            unconditional_value(nc, b),
        ),
        IndicatorSpec::Derived(DerivedIndicator::FScore) => {
            IndicatorValue::ratio(2.0 * nc.p_tp, nc.p_fp + nc.p_fn + 2.0 * nc.p_tp)
        }
        IndicatorSpec::Derived(DerivedIndicator::Accuracy) => {
            IndicatorValue::Defined((nc.p_tn + nc.p_tp).min(1.0))
        }
        IndicatorSpec::Derived(DerivedIndicator::BalancedAccuracy) => {
            match (
                indicator_value(nc, &IndicatorSpec::TNR),
                indicator_value(nc, &IndicatorSpec::TPR),
            ) {
                (IndicatorValue::Defined(tnr), IndicatorValue::Defined(tpr)) => {
                    IndicatorValue::Defined((tnr + tpr) / 2.0)
                }
                _ => IndicatorValue::Undefined,
            }
        }
        IndicatorSpec::Derived(DerivedIndicator::Jaccard) => {
            IndicatorValue::ratio(nc.p_tp, nc.p_fp + nc.p_fn + nc.p_tp)
        }
    }
}

/// Rebuilds a normalized confusion from the positive prior, FPR and TPR.
///
/// A rate is only required when its class has non-zero prior: with
/// `prior_pos == 0` the positive cells are zero whatever `tpr` is, and
/// symmetrically for `prior_pos == 1`.
pub fn confusion_from_roc(
    prior_pos: f64,
    fpr: IndicatorValue,
    tpr: IndicatorValue,
) -> Result<NormalizedConfusion, IndicatorError> {
    let check = |name: &'static str, value: f64| {
        if (0.0..=1.0).contains(&value) {
            Ok(value)
        } else {
            Err(IndicatorError::OutOfRange { name, value })
        }
    };
    let prior_pos = check("prior_pos", prior_pos)?;
    let prior_neg = 1.0 - prior_pos;

    let (p_fn, p_tp) = if prior_pos > 0.0 {
        let tpr = tpr.value().ok_or(IndicatorError::MissingIndicator("TPR"))?;
        let tpr = check("tpr", tpr)?;
        (prior_pos * (1.0 - tpr), prior_pos * tpr)
    } else {
        (0.0, 0.0)
    };
    let (p_tn, p_fp) = if prior_neg > 0.0 {
        let fpr = fpr.value().ok_or(IndicatorError::MissingIndicator("FPR"))?;
        let fpr = check("fpr", fpr)?;
        (prior_neg * (1.0 - fpr), prior_neg * fpr)
    } else {
        (0.0, 0.0)
    };
    NormalizedConfusion::new(p_tn, p_fp, p_fn, p_tp)
}
