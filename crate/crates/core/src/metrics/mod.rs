//! Detection metrics and rank correlation.

mod ap;
mod matching;
mod report;
mod spearman;

use core::fmt;

use crate::bbox::BBox;

pub use self::ap::{average_precision, Interpolation, ScoredOutcome};
pub use self::matching::{match_detections, Counts, MatchResult, MatchedDetection};
pub use self::report::{evaluate, mean_average_precision, ClassMetrics, EvalParams, EvalReport};
pub use self::spearman::{average_ranks, spearman_permutation_p, spearman_rho, PermutationMode};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// A ratio that may be undefined because its denominator is zero.
///
/// Undefined is kept distinct from zero: a precision of 0 and a precision
/// that could not be computed are different findings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricValue {
    Defined(f64),
    Undefined,
}

impl MetricValue {
    pub fn ratio(num: u64, den: u64) -> Self {
        if den == 0 {
            MetricValue::Undefined
        } else {
            MetricValue::Defined(num as f64 / den as f64)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            MetricValue::Defined(v) => Some(v),
            MetricValue::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, MetricValue::Defined(_))
    }
}

impl fmt::Display for MetricValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricValue::Defined(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$}"),
                None => write!(f, "{v}"),
            },
            MetricValue::Undefined => f.write_str("undefined"),
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for MetricValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MetricValue::Defined(v) => s.serialize_f64(*v),
            MetricValue::Undefined => s.serialize_str("undefined"),
        }
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for MetricValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = MetricValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"undefined\"")
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<MetricValue, E> {
                Ok(MetricValue::Defined(v))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<MetricValue, E> {
                Ok(MetricValue::Defined(v as f64))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<MetricValue, E> {
                Ok(MetricValue::Defined(v as f64))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<MetricValue, E> {
                if v == "undefined" {
                    Ok(MetricValue::Undefined)
                } else {
                    Err(E::invalid_value(serde::de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(Visitor)
    }
}

/// Intersection over union of two half-open pixel boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

/// `(precision, recall)` from match counts.
pub fn precision_recall(c: &Counts) -> (MetricValue, MetricValue) {
    (
        MetricValue::ratio(c.tp, c.tp + c.fp),
        MetricValue::ratio(c.tp, c.tp + c.fn_),
    )
}
