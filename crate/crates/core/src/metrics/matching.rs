use alloc::vec::Vec;
use core::ops::{Add, AddAssign};

use super::iou;
use crate::dataset::GroundTruthObject;
use crate::detection::{rank_order, Detection};
use crate::label::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedDetection {
    pub detection: Detection,
    /// Index into the ground-truth slice, `None` for a false positive.
    pub gt_index: Option<usize>,
    /// Best IoU against a same-class ground truth that was still free when
    /// this detection was processed (0 when there was none).
    pub iou: f64,
}

impl MatchedDetection {
    pub fn is_tp(&self) -> bool {
        self.gt_index.is_some()
    }
}

/// Outcome of matching one image's detections against its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Detections in processing order.
    pub matches: Vec<MatchedDetection>,
    gt_labels: Vec<ClassLabel>,
    gt_matched: Vec<bool>,
}

impl MatchResult {
    pub fn gt_matched(&self) -> &[bool] {
        &self.gt_matched
    }

    pub fn class_counts(&self, label: ClassLabel) -> Counts {
        self.counts_where(|l| l == label)
    }

    pub fn counts(&self) -> Counts {
        self.counts_where(|_| true)
    }

    fn counts_where(&self, keep: impl Fn(ClassLabel) -> bool) -> Counts {
        let tp = self
            .matches
            .iter()
            .filter(|m| keep(m.detection.label) && m.is_tp())
            .count() as u64;
        let fp = self
            .matches
            .iter()
            .filter(|m| keep(m.detection.label) && !m.is_tp())
            .count() as u64;
        let gt = self.gt_labels.iter().filter(|&&l| keep(l)).count() as u64;
        Counts {
            tp,
            fp,
            fn_: gt - tp,
        }
    }
}

/// Greedy score-ordered matching for a single image.
///
/// Detections are visited in [`rank_order`]. Each takes the free
/// same-class ground truth with the highest IoU (lowest index on ties) if
/// that IoU is at least `iou_threshold`; otherwise it is a false positive.
pub fn match_detections(
    gt: &[GroundTruthObject],
    dets: &[Detection],
    iou_threshold: f64,
) -> MatchResult {
    let mut order: Vec<&Detection> = dets.iter().collect();
    order.sort_by(|a, b| rank_order(a, b));
    let mut gt_matched = alloc::vec![false; gt.len()];
    let mut matches = Vec::with_capacity(dets.len());
    for det in order {
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in gt.iter().enumerate() {
            if gt_matched[j] || g.label != det.label {
                continue;
            }
            let v = iou(&det.bbox, &g.bbox);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        let (gt_index, best_iou) = match best {
            Some((j, v)) if v >= iou_threshold && v > 0.0 => {
                gt_matched[j] = true;
                (Some(j), v)
            }
            Some((_, v)) => (None, v),
            None => (None, 0.0),
        };
        matches.push(MatchedDetection {
            detection: det.clone(),
            gt_index,
            iou: best_iou,
        });
    }
    MatchResult {
        matches,
        gt_labels: gt.iter().map(|g| g.label).collect(),
        gt_matched,
    }
}
