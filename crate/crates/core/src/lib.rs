//! Core algorithms for evaluating parasite and white-blood-cell detectors on
//! thick blood smear images and turning their counts into parasite densities.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches a file
//! system lives in the `smearkit` companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod augment;
pub mod bbox;
pub mod dataset;
pub mod detection;
mod error;
pub mod label;
pub mod metrics;
pub mod quantify;
pub mod rng;
pub mod split;
pub mod synthetic;

pub use crate::augment::{augment_record, flip_bbox, AppliedFlips, FlipKind};
pub use crate::bbox::BBox;
pub use crate::dataset::{CaptureMetadata, Dataset, GroundTruthObject, ImageRecord};
pub use crate::detection::{filter_by_score, nms, Detection, DetectionSet};
pub use crate::error::{Error, Result};
pub use crate::label::{ClassLabel, LabelAliases};
pub use crate::metrics::{
    average_precision, iou, match_detections, mean_average_precision, precision_recall,
    spearman_rho, ClassMetrics, EvalParams, EvalReport, Interpolation, MatchResult, MetricValue,
};
pub use crate::quantify::{
    count_correlation, interpret, parasitemia, DensityFormula, FilmCounts, InterpretationTable,
    ParasitemiaResult,
};
pub use crate::split::{split_dataset, SplitGrouping};
