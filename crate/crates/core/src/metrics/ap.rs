use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::MetricValue;

/// How the precision-recall curve is summarised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Interpolation {
    /// Area under the monotone precision envelope, integrated at every
    /// recall step.
    #[default]
    AllPoint,
    /// Mean of the envelope sampled at recall 0, 0.1, ..., 1.0.
    ElevenPoint,
}

impl Interpolation {
    pub fn as_str(self) -> &'static str {
        match self {
            Interpolation::AllPoint => "all-point",
            Interpolation::ElevenPoint => "eleven-point",
        }
    }
}

impl fmt::Display for Interpolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Interpolation {
    type Err = &'static str;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all-point" => Ok(Interpolation::AllPoint),
            "eleven-point" | "11-point" => Ok(Interpolation::ElevenPoint),
            _ => Err("expected all-point or eleven-point"),
        }
    }
}

/// One ranked detection of a class: its score and whether it matched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredOutcome {
    pub score: f64,
    pub tp: bool,
}

/// Average precision for one class pooled across images.
///
/// `outcomes` are stably sorted by descending score, so callers decide the
/// order among equal scores. Undefined when `n_gt` is zero.
pub fn average_precision(
    outcomes: &[ScoredOutcome],
    n_gt: u64,
    interpolation: Interpolation,
) -> MetricValue {
    if n_gt == 0 {
        return MetricValue::Undefined;
    }
    let mut ranked: Vec<ScoredOutcome> = outcomes.to_vec();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));

    let mut recall = Vec::with_capacity(ranked.len());
    let mut precision = Vec::with_capacity(ranked.len());
    let mut tp = 0u64;
    for (i, o) in ranked.iter().enumerate() {
        if o.tp {
            tp += 1;
        }
        recall.push(tp as f64 / n_gt as f64);
        precision.push(tp as f64 / (i + 1) as f64);
    }
    // Envelope: best precision at any recall at or beyond this point.
    for i in (0..precision.len().saturating_sub(1)).rev() {
        if precision[i + 1] > precision[i] {
            precision[i] = precision[i + 1];
        }
    }

    let ap = match interpolation {
        Interpolation::AllPoint => {
            let mut area = 0.0;
            let mut prev_recall = 0.0;
            for (r, p) in recall.iter().zip(&precision) {
                if *r > prev_recall {
                    area += (r - prev_recall) * p;
                    prev_recall = *r;
                }
            }
            area
        }
        Interpolation::ElevenPoint => {
            let mut sum = 0.0;
            for k in 0..=10u32 {
                let t = f64::from(k) / 10.0;
                // recall is non-decreasing, so the first hit carries the max
                if let Some(i) = recall.iter().position(|&r| r >= t) {
                    sum += precision[i];
                }
            }
            sum / 11.0
        }
    };
    MetricValue::Defined(ap)
}
