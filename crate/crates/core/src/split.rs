//! Seeded train/test partitioning.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::dataset::{Dataset, ImageRecord};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitGrouping {
    /// Each image is assigned independently.
    #[default]
    Image,
    /// All images of a slide land on the same side.
    Slide,
}

/// Number of items that go to the training side.
///
/// `round(n * fraction)`, then clamped so both sides keep at least one item
/// whenever `n >= 2`.
pub fn train_size(n: usize, train_fraction: f64) -> usize {
    let raw = libm::round(n as f64 * train_fraction) as usize;
    if n >= 2 {
        raw.clamp(1, n - 1)
    } else {
        raw.min(n)
    }
}

/// Splits `d` into `(train, test)`.
///
/// Records are sorted by `image_id` (or slides by `slide_id`), shuffled with
/// Fisher-Yates driven by `seed`, and the first [`train_size`] units go to
/// training. Both outputs keep the input record order.
pub fn split_dataset(
    d: &Dataset,
    train_fraction: f64,
    seed: u64,
    grouping: SplitGrouping,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::OutOfRange {
            name: "train_fraction",
            value: train_fraction,
            range: "(0, 1)",
        });
    }
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = Rng::new(seed);
    let in_train: Vec<bool> = match grouping {
        SplitGrouping::Image => {
            let mut order: Vec<usize> = (0..d.len()).collect();
            order.sort_by(|&a, &b| d.records()[a].image_id.cmp(&d.records()[b].image_id));
            rng.shuffle(&mut order);
            let k = train_size(order.len(), train_fraction);
            let mut flags = alloc::vec![false; d.len()];
            for &i in &order[..k] {
                flags[i] = true;
            }
            flags
        }
        SplitGrouping::Slide => {
            let slides: BTreeSet<&str> = d
                .records()
                .iter()
                .map(|r| r.metadata.slide_id.as_str())
                .collect();
            if slides.len() < 2 {
                return Err(Error::TooFewGroups(slides.len()));
            }
            let mut slides: Vec<&str> = slides.into_iter().collect();
            rng.shuffle(&mut slides);
            let k = train_size(slides.len(), train_fraction);
            let train: BTreeSet<&str> = slides[..k].iter().copied().collect();
            d.records()
                .iter()
                .map(|r| train.contains(r.metadata.slide_id.as_str()))
                .collect()
        }
    };
    let (train, test): (Vec<_>, Vec<_>) = d.records().iter().zip(in_train).partition(|(_, t)| *t);
    let collect = |side: Vec<(&ImageRecord, bool)>| {
        Dataset::new(side.into_iter().map(|(r, _)| r.clone()).collect())
    };
    Ok((collect(train)?, collect(test)?))
}
