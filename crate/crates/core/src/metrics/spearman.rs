use alloc::vec::Vec;

use super::MetricValue;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // ranks start+1 ..= end
        let mean = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = mean;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> MetricValue {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return MetricValue::Undefined;
    }
    MetricValue::Defined((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations(x.len()));
    }
    Ok(())
}

/// Spearman's rank correlation: Pearson correlation of average ranks.
///
/// Undefined when either input is constant.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<MetricValue> {
    check_pair(x, y)?;
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationMode {
    /// Every permutation of `y`; only sensible for short inputs.
    Exact,
    MonteCarlo {
        samples: u32,
        seed: u64,
    },
}

impl PermutationMode {
    /// Exact up to 8 observations, otherwise 10 000 seeded shuffles.
    pub fn auto(n: usize, seed: u64) -> Self {
        if n <= 8 {
            PermutationMode::Exact
        } else {
            PermutationMode::MonteCarlo {
                samples: 10_000,
                seed,
            }
        }
    }
}

/// Two-sided permutation p-value for Spearman's rho: the share of
/// permutations of `y` whose |rho| reaches the observed |rho|.
///
/// The Monte Carlo estimate counts the observed arrangement, giving
/// `(hits + 1) / (samples + 1)`.
pub fn spearman_permutation_p(x: &[f64], y: &[f64], mode: PermutationMode) -> Result<MetricValue> {
    check_pair(x, y)?;
    let rx = average_ranks(x);
    let mut ry = average_ranks(y);
    let observed = match pearson(&rx, &ry) {
        MetricValue::Defined(v) => libm::fabs(v),
        MetricValue::Undefined => return Ok(MetricValue::Undefined),
    };
    let tol = 1e-12;
    let reaches = |ry: &[f64]| {
        pearson(&rx, ry)
            .value()
            .is_some_and(|v| libm::fabs(v) >= observed - tol)
    };
    match mode {
        PermutationMode::Exact => {
            // Heap's algorithm
            let n = ry.len();
            let mut c = alloc::vec![0usize; n];
            let mut hits = u64::from(reaches(&ry));
            let mut total = 1u64;
            let mut i = 0;
            while i < n {
                if c[i] < i {
                    if i % 2 == 0 {
                        ry.swap(0, i);
                    } else {
                        ry.swap(c[i], i);
                    }
                    hits += u64::from(reaches(&ry));
                    total += 1;
                    c[i] += 1;
                    i = 0;
                } else {
                    c[i] = 0;
                    i += 1;
                }
            }
            Ok(MetricValue::Defined(hits as f64 / total as f64))
        }
        PermutationMode::MonteCarlo { samples, seed } => {
            let mut rng = Rng::new(seed);
            let mut hits = 0u64;
            for _ in 0..samples {
                rng.shuffle(&mut ry);
                hits += u64::from(reaches(&ry));
            }
            Ok(MetricValue::Defined(
                (hits + 1) as f64 / (u64::from(samples) + 1) as f64,
            ))
        }
    }
}
