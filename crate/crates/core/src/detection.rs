//! Model detections, score filtering and class-wise non-maximum suppression.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::bbox::BBox;
use crate::dataset::Dataset;
use crate::error::{check_unit, Error, Result};
use crate::label::ClassLabel;
use crate::metrics::iou;

pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image_id: String,
    pub label: ClassLabel,
    pub bbox: BBox,
    score: f64,
}

impl Detection {
    pub fn new(
        image_id: impl Into<String>,
        label: ClassLabel,
        bbox: BBox,
        score: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidScore(score));
        }
        Ok(Self {
            image_id: image_id.into(),
            label,
            bbox,
            score,
        })
    }

    #[inline]
    pub fn score(&self) -> f64 {
        self.score
    }
}

/// Processing order shared by NMS and matching: score descending, then
/// `xmin`, `ymin`, `xmax`, `ymax`, label ascending.
pub fn rank_order(a: &Detection, b: &Detection) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.bbox.xmin().cmp(&b.bbox.xmin()))
        .then(a.bbox.ymin().cmp(&b.bbox.ymin()))
        .then(a.bbox.xmax().cmp(&b.bbox.xmax()))
        .then(a.bbox.ymax().cmp(&b.bbox.ymax()))
        .then(a.label.cmp(&b.label))
}

/// Detections grouped by image id. Groups keep insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionSet {
    groups: BTreeMap<String, Vec<Detection>>,
}

impl DetectionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, det: Detection) {
        self.groups
            .entry(det.image_id.clone())
            .or_default()
            .push(det);
    }

    pub fn image_ids(&self) -> impl Iterator<Item = &str> {
        self.groups.keys().map(String::as_str)
    }

    pub fn get(&self, image_id: &str) -> &[Detection] {
        self.groups.get(image_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &[Detection])> {
        self.groups.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Detection> {
        self.groups.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Image ids that have detections but no record in `dataset`.
    pub fn orphans(&self, dataset: &Dataset) -> Vec<String> {
        self.groups
            .keys()
            .filter(|id| !dataset.contains(id))
            .cloned()
            .collect()
    }

    /// Applies `f` to every group, keeping the grouping.
    pub fn try_map_groups<F>(&self, mut f: F) -> Result<DetectionSet>
    where
        F: FnMut(&[Detection]) -> Result<Vec<Detection>>,
    {
        let mut groups = BTreeMap::new();
        for (id, dets) in &self.groups {
            groups.insert(id.clone(), f(dets)?);
        }
        Ok(DetectionSet { groups })
    }
}

impl FromIterator<Detection> for DetectionSet {
    fn from_iter<I: IntoIterator<Item = Detection>>(iter: I) -> Self {
        let mut set = DetectionSet::new();
        for d in iter {
            set.push(d);
        }
        set
    }
}

/// Keeps detections with `score >= threshold`, preserving order.
pub fn filter_by_score(ds: &DetectionSet, threshold: f64) -> DetectionSet {
    let groups = ds
        .groups
        .iter()
        .map(|(id, dets)| {
            (
                id.clone(),
                dets.iter()
                    .filter(|d| d.score >= threshold)
                    .cloned()
                    .collect(),
            )
        })
        .collect();
    DetectionSet { groups }
}

/// Greedy class-wise NMS for the detections of one image.
///
/// A candidate is dropped when its IoU with an already kept detection of the
/// same class is strictly greater than `iou_threshold`. Output is in
/// [`rank_order`].
pub fn nms(dets: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>> {
    check_unit("iou_threshold", iou_threshold)?;
    if let Some(first) = dets.first() {
        if let Some(other) = dets.iter().find(|d| d.image_id != first.image_id) {
            return Err(Error::MixedImageIds {
                expected: first.image_id.clone(),
                found: other.image_id.clone(),
            });
        }
    }
    let mut order: Vec<&Detection> = dets.iter().collect();
    order.sort_by(|a, b| rank_order(a, b));
    let mut kept: Vec<Detection> = Vec::new();
    for cand in order {
        let suppressed = kept
            .iter()
            .any(|k| k.label == cand.label && iou(&k.bbox, &cand.bbox) > iou_threshold);
        if !suppressed {
            kept.push(cand.clone());
        }
    }
    Ok(kept)
}
