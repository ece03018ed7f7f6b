use alloc::string::String;
use alloc::vec::Vec;

use super::ap::{average_precision, Interpolation, ScoredOutcome};
use super::matching::{match_detections, Counts};
use super::{precision_recall, MetricValue, DEFAULT_IOU_THRESHOLD};
use crate::dataset::Dataset;
use crate::detection::{DetectionSet, DEFAULT_SCORE_THRESHOLD};
use crate::error::{check_unit, Error, Result};
use crate::label::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalParams {
    pub iou_threshold: f64,
    /// Cutoff for the precision/recall operating point. AP always ranks the
    /// full detection list.
    pub score_threshold: f64,
    pub interpolation: Interpolation,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            score_threshold: DEFAULT_SCORE_THRESHOLD,
            interpolation: Interpolation::AllPoint,
        }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        check_unit("iou_threshold", self.iou_threshold)?;
        check_unit("score_threshold", self.score_threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassMetrics {
    pub class: ClassLabel,
    pub ap: MetricValue,
    pub precision: MetricValue,
    pub recall: MetricValue,
    pub tp: u64,
    pub fp: u64,
    #[cfg_attr(feature = "serde", serde(rename = "fn"))]
    pub fn_: u64,
    pub ground_truth: u64,
    /// Detections of this class at any score (the AP ranking).
    pub detections: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub params: EvalParams,
    pub classes: Vec<ClassMetrics>,
    /// Mean AP over classes whose AP is defined.
    pub map: f64,
    /// Classes left out of `map` because they have no ground truth.
    pub undefined_classes: Vec<ClassLabel>,
    pub images: u64,
    /// Detection image ids with no dataset record; ignored by the evaluation.
    pub orphan_images: Vec<String>,
}

impl EvalReport {
    pub fn class(&self, label: ClassLabel) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.class == label)
    }
}

/// Builds the report from per-class metrics.
pub fn mean_average_precision(
    classes: Vec<ClassMetrics>,
    params: EvalParams,
) -> Result<EvalReport> {
    let defined: Vec<f64> = classes.iter().filter_map(|c| c.ap.value()).collect();
    if defined.is_empty() {
        return Err(Error::NoDefinedAp);
    }
    let map = defined.iter().sum::<f64>() / defined.len() as f64;
    let undefined_classes = classes
        .iter()
        .filter(|c| !c.ap.is_defined())
        .map(|c| c.class)
        .collect();
    Ok(EvalReport {
        params,
        classes,
        map,
        undefined_classes,
        images: 0,
        orphan_images: Vec::new(),
    })
}

/// Matches every image of `dataset` and aggregates per-class metrics.
///
/// Images are visited in `image_id` order; within an image detections are in
/// matching order. That sequence fixes the AP ranking among equal scores.
pub fn evaluate(
    dataset: &Dataset,
    detections: &DetectionSet,
    params: EvalParams,
) -> Result<EvalReport> {
    params.validate()?;
    let mut records: Vec<_> = dataset.records().iter().collect();
    records.sort_by(|a, b| a.image_id.cmp(&b.image_id));

    let mut outcomes: [Vec<ScoredOutcome>; 2] = [Vec::new(), Vec::new()];
    let mut counts = [Counts::default(); 2];
    let mut n_gt = [0u64; 2];
    for r in records {
        let m = match_detections(
            &r.objects,
            detections.get(&r.image_id),
            params.iou_threshold,
        );
        for md in &m.matches {
            let c = md.detection.label as usize;
            outcomes[c].push(ScoredOutcome {
                score: md.detection.score(),
                tp: md.is_tp(),
            });
            if md.detection.score() >= params.score_threshold {
                if md.is_tp() {
                    counts[c].tp += 1;
                } else {
                    counts[c].fp += 1;
                }
            }
        }
        for o in &r.objects {
            n_gt[o.label as usize] += 1;
        }
    }

    let classes = ClassLabel::ALL
        .iter()
        .map(|&label| {
            let c = label as usize;
            let mut k = counts[c];
            k.fn_ = n_gt[c] - k.tp;
            let (precision, recall) = precision_recall(&k);
            ClassMetrics {
                class: label,
                ap: average_precision(&outcomes[c], n_gt[c], params.interpolation),
                precision,
                recall,
                tp: k.tp,
                fp: k.fp,
                fn_: k.fn_,
                ground_truth: n_gt[c],
                detections: outcomes[c].len() as u64,
            }
        })
        .collect();
    let mut report = mean_average_precision(classes, params)?;
    report.images = dataset.len() as u64;
    report.orphan_images = detections.orphans(dataset);
    Ok(report)
}
