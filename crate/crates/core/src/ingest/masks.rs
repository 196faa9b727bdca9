use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, AddAssign};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::pgm::{read_pgm, GrayImage};
use super::records::{EvaluationRecord, Payload};
use super::IngestError;
use crate::indicators::{ConfusionCounts, Outcome};

/// How ground-truth gray levels map to classes, and where predictions are
/// cut into positive/negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMapping {
    positive: BTreeSet<u8>,
    negative: BTreeSet<u8>,
    ignore: BTreeSet<u8>,
    prediction_threshold: u8,
}

/// CDNET conventions: 255 motion, 0 static, 50 hard shadow (background),
/// 85 outside region of interest, 170 unknown motion.
impl Default for LabelMapping {
    fn default() -> Self {
        LabelMapping {
            positive: [255].into(),
            negative: [0, 50].into(),
            ignore: [85, 170].into(),
            prediction_threshold: 128,
        }
    }
}

#[derive(Clone, Copy)]
enum Label {
    Positive,
    Negative,
    Ignore,
}

impl LabelMapping {
    pub fn new(
        positive: impl IntoIterator<Item = u8>,
        negative: impl IntoIterator<Item = u8>,
        ignore: impl IntoIterator<Item = u8>,
        prediction_threshold: u8,
    ) -> Result<Self, IngestError> {
        let mapping = LabelMapping {
            positive: positive.into_iter().collect(),
            negative: negative.into_iter().collect(),
            ignore: ignore.into_iter().collect(),
            prediction_threshold,
        };
        mapping.validate()?;
        Ok(mapping)
    }

    fn validate(&self) -> Result<(), IngestError> {
        let pairs = [
            ("positive", &self.positive, "negative", &self.negative),
            ("positive", &self.positive, "ignore", &self.ignore),
            ("negative", &self.negative, "ignore", &self.ignore),
        ];
        for (a_name, a, b_name, b) in pairs {
            if let Some(v) = a.intersection(b).next() {
                return Err(IngestError::Mapping(format!(
                    "value {v} is both {a_name} and {b_name}"
                )));
            }
        }
        Ok(())
    }

    pub fn prediction_threshold(&self) -> u8 {
        self.prediction_threshold
    }

    pub fn apply(&self, overrides: &MappingOverrides) -> Result<LabelMapping, IngestError> {
        let mut mapping = self.clone();
        if let Some(p) = &overrides.positive {
            mapping.positive = p.iter().copied().collect();
        }
        if let Some(n) = &overrides.negative {
            mapping.negative = n.iter().copied().collect();
        }
        if let Some(i) = &overrides.ignore {
            mapping.ignore = i.iter().copied().collect();
        }
        if let Some(t) = overrides.threshold {
            mapping.prediction_threshold = t;
        }
        mapping.validate()?;
        Ok(mapping)
    }

    fn table(&self) -> [Option<Label>; 256] {
        let mut table = [None; 256];
        for &v in &self.positive {
            table[v as usize] = Some(Label::Positive);
        }
        for &v in &self.negative {
            table[v as usize] = Some(Label::Negative);
        }
        for &v in &self.ignore {
            table[v as usize] = Some(Label::Ignore);
        }
        table
    }
}

/// Confusion counts over the non-ignored pixels plus the ignored total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MaskTally {
    pub counts: ConfusionCounts,
    pub ignored: u64,
}

impl Add for MaskTally {
    type Output = MaskTally;

    fn add(self, rhs: MaskTally) -> MaskTally {
        MaskTally {
            counts: self.counts + rhs.counts,
            ignored: self.ignored + rhs.ignored,
        }
    }
}

impl AddAssign for MaskTally {
    fn add_assign(&mut self, rhs: MaskTally) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for MaskTally {
    fn sum<I: Iterator<Item = MaskTally>>(iter: I) -> MaskTally {
        iter.fold(MaskTally::default(), Add::add)
    }
}

/// Compares a ground-truth map with a prediction map pixel by pixel.
pub fn count_from_masks(
    gt_map: &GrayImage,
    pred_map: &GrayImage,
    mapping: &LabelMapping,
) -> Result<MaskTally, IngestError> {
    if (gt_map.width(), gt_map.height()) != (pred_map.width(), pred_map.height()) {
        return Err(IngestError::DimensionMismatch(
            gt_map.width(),
            gt_map.height(),
            pred_map.width(),
            pred_map.height(),
        ));
    }
    let table = mapping.table();
    let width = gt_map.width();
    let mut tally = MaskTally::default();
    for (i, (&gt, &pred)) in gt_map.pixels().iter().zip(pred_map.pixels()).enumerate() {
        let truth = match table[gt as usize] {
            Some(Label::Positive) => true,
            Some(Label::Negative) => false,
            Some(Label::Ignore) => {
                tally.ignored += 1;
                continue;
            }
            None => {
                return Err(IngestError::UnmappedLabel {
                    value: gt,
                    x: i % width,
                    y: i / width,
                })
            }
        };
        let predicted = pred >= mapping.prediction_threshold;
        tally.counts.record(Outcome::from_classes(truth, predicted));
    }
    Ok(tally)
}

/// Per-manifest-entry label mapping changes; absent fields keep defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingOverrides {
    pub positive: Option<Vec<u8>>,
    pub negative: Option<Vec<u8>>,
    pub ignore: Option<Vec<u8>>,
    pub threshold: Option<u8>,
}

/// One video of a mask manifest. Directories are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    #[serde(default)]
    pub algorithm: Option<String>,
    pub video_id: String,
    #[serde(default)]
    pub category: String,
    pub gt_dir: PathBuf,
    pub pred_dir: PathBuf,
    #[serde(default)]
    pub mapping: Option<MappingOverrides>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoCounts {
    pub video_id: String,
    pub category: String,
    pub frames: usize,
    pub tally: MaskTally,
}

fn frames_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>, IngestError> {
    let mut frames = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| IngestError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| IngestError::io(dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if stem.starts_with('.') {
            continue;
        }
        if let Some(previous) = frames.insert(stem.to_string(), path.clone()) {
            return Err(IngestError::UnmatchedFrames(format!(
                "stem '{stem}' is ambiguous: {} and {}",
                previous.display(),
                path.display()
            )));
        }
    }
    Ok(frames)
}

/// Counts every frame pair of one manifest entry. Frames pair by identical
/// file stem; any unpaired stem is an error.
pub fn count_video(entry: &ManifestEntry, base_dir: &Path) -> Result<VideoCounts, IngestError> {
    let mapping = match &entry.mapping {
        Some(o) => LabelMapping::default().apply(o)?,
        None => LabelMapping::default(),
    };
    let gt_dir = base_dir.join(&entry.gt_dir);
    let pred_dir = base_dir.join(&entry.pred_dir);
    let gt = frames_by_stem(&gt_dir)?;
    let pred = frames_by_stem(&pred_dir)?;

    let gt_only: Vec<&str> = gt
        .keys()
        .filter(|k| !pred.contains_key(*k))
        .map(String::as_str)
        .collect();
    let pred_only: Vec<&str> = pred
        .keys()
        .filter(|k| !gt.contains_key(*k))
        .map(String::as_str)
        .collect();
    if !gt_only.is_empty() || !pred_only.is_empty() || gt.is_empty() {
        return Err(IngestError::UnmatchedFrames(format!(
            "video '{}': ground truth only [{}]; prediction only [{}]",
            entry.video_id,
            gt_only.join(", "),
            pred_only.join(", ")
        )));
    }

    let mut tally = MaskTally::default();
    for (stem, gt_path) in &gt {
        let pred_path = &pred[stem];
        let gt_img = read_pgm(gt_path)?;
        let pred_img = read_pgm(pred_path)?;
        tally += count_from_masks(&gt_img, &pred_img, &mapping)
            .map_err(|e| e.context(format!("{} vs {}", gt_path.display(), pred_path.display())))?;
    }
    Ok(VideoCounts {
        video_id: entry.video_id.clone(),
        category: entry.category.clone(),
        frames: gt.len(),
        tally,
    })
}

/// Reads a JSON manifest and counts every entry. `default_algorithm` names
/// entries that carry no `algorithm` field. Each record's size is its
/// non-ignored pixel total.
pub fn ingest_manifest(
    manifest: &Path,
    default_algorithm: Option<&str>,
) -> Result<Vec<EvaluationRecord>, IngestError> {
    let text = std::fs::read_to_string(manifest).map_err(|e| IngestError::io(manifest, e))?;
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(&text).map_err(|e| IngestError::Parse {
            line: e.line() as u64,
            reason: format!("{}: {e}", manifest.display()),
        })?;
    let base_dir = manifest.parent().unwrap_or(Path::new("."));

    let mut records = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        let algorithm = entry
            .algorithm
            .as_deref()
            .or(default_algorithm)
            .ok_or_else(|| {
                IngestError::Schema(format!(
                    "manifest entry '{}' has no algorithm and no default was given",
                    entry.video_id
                ))
            })?;
        let video = count_video(entry, base_dir)
            .map_err(|e| e.context(format!("manifest entry '{}'", entry.video_id)))?;
        let total = video.tally.counts.total();
        if total == 0 {
            return Err(IngestError::Domain {
                line: i as u64 + 1,
                reason: format!("video '{}' has no non-ignored pixels", entry.video_id),
            });
        }
        records.push(EvaluationRecord {
            algorithm: algorithm.to_string(),
            category: video.category,
            video_id: video.video_id,
            payload: Payload::Counts(video.tally.counts),
            size: Some(total),
            line: i as u64 + 1,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, p: &[u8]) -> GrayImage {
        GrayImage::new(w, h, p.to_vec()).unwrap()
    }

    #[test]
    fn four_pixel_fixture() {
        let gt = img(2, 2, &[255, 0, 85, 255]);
        let pred = img(2, 2, &[200, 10, 255, 90]);
        let tally = count_from_masks(&gt, &pred, &LabelMapping::default()).unwrap();
        assert_eq!(tally.counts, ConfusionCounts::new(1, 0, 1, 1).unwrap());
        assert_eq!(tally.ignored, 1);
    }

    #[test]
    fn identical_maps_have_no_errors() {
        let gt = img(3, 1, &[0, 255, 50]);
        let pred = img(3, 1, &[0, 255, 0]);
        let tally = count_from_masks(&gt, &pred, &LabelMapping::default()).unwrap();
        assert_eq!((tally.counts.false_pos, tally.counts.false_neg), (0, 0));
        assert_eq!(tally.counts.total(), 3);
    }

    #[test]
    fn unmapped_and_mismatched() {
        let gt = img(2, 1, &[0, 99]);
        let pred = img(2, 1, &[0, 0]);
        assert!(matches!(
            count_from_masks(&gt, &pred, &LabelMapping::default()),
            Err(IngestError::UnmappedLabel {
                value: 99,
                x: 1,
                y: 0
            })
        ));
        let small = img(1, 1, &[0]);
        assert!(matches!(
            count_from_masks(&gt, &small, &LabelMapping::default()),
            Err(IngestError::DimensionMismatch(..))
        ));
    }

    #[test]
    fn mapping_must_be_disjoint() {
        assert!(LabelMapping::new([1], [1], [], 128).is_err());
        assert!(LabelMapping::default()
            .apply(&MappingOverrides {
                ignore: Some(vec![0]),
                ..Default::default()
            })
            .is_err());
        let m = LabelMapping::default()
            .apply(&MappingOverrides {
                negative: Some(vec![0]),
                ignore: Some(vec![50, 85, 170]),
                threshold: Some(1),
                ..Default::default()
            })
            .unwrap();
        let gt = img(2, 1, &[50, 255]);
        let pred = img(2, 1, &[0, 1]);
        let tally = count_from_masks(&gt, &pred, &m).unwrap();
        assert_eq!(tally.ignored, 1);
        assert_eq!(tally.counts.true_pos, 1);
    }
}
