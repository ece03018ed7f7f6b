//! Flip augmentation on annotations.
//!
//! Only boxes are transformed here. [`AppliedFlips`] tells downstream tooling
//! which pixel flips to replay on the image itself.

use alloc::vec::Vec;

use crate::bbox::BBox;
use crate::dataset::ImageRecord;
use crate::error::{check_unit, Result};
use crate::rng::Rng;

pub const DEFAULT_FLIP_PROBABILITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlipKind {
    Horizontal,
    Vertical,
}

/// Mirrors `b` inside a `width` x `height` image.
pub fn flip_bbox(b: BBox, kind: FlipKind, width: u32, height: u32) -> Result<BBox> {
    b.check_within(width, height)?;
    match kind {
        FlipKind::Horizontal => BBox::new(width - b.xmax(), b.ymin(), width - b.xmin(), b.ymax()),
        FlipKind::Vertical => BBox::new(b.xmin(), height - b.ymax(), b.xmax(), height - b.ymin()),
    }
}

/// Which flips fired for one augmented record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AppliedFlips {
    pub horizontal: bool,
    pub vertical: bool,
}

impl AppliedFlips {
    pub fn kinds(self) -> impl Iterator<Item = FlipKind> {
        [
            (self.horizontal, FlipKind::Horizontal),
            (self.vertical, FlipKind::Vertical),
        ]
        .into_iter()
        .filter_map(|(on, k)| on.then_some(k))
    }

    /// Short tag such as `h`, `v`, `hv` or `none`.
    pub fn tag(self) -> &'static str {
        match (self.horizontal, self.vertical) {
            (false, false) => "none",
            (true, false) => "h",
            (false, true) => "v",
            (true, true) => "hv",
        }
    }
}

/// Draws the horizontal then the vertical decision from a generator seeded
/// with `seed`; a flip fires when its uniform draw is below its probability.
pub fn draw_flips(seed: u64, p_h: f64, p_v: f64) -> Result<AppliedFlips> {
    check_unit("p_h", p_h)?;
    check_unit("p_v", p_v)?;
    let mut rng = Rng::new(seed);
    let horizontal = rng.unit() < p_h;
    let vertical = rng.unit() < p_v;
    Ok(AppliedFlips {
        horizontal,
        vertical,
    })
}

/// Applies an already-decided set of flips to every object of `r`.
pub fn apply_flips(r: &ImageRecord, flips: AppliedFlips) -> Result<ImageRecord> {
    let mut out = r.clone();
    for kind in flips.kinds() {
        for obj in &mut out.objects {
            obj.bbox = flip_bbox(obj.bbox, kind, r.width, r.height)?;
        }
    }
    Ok(out)
}

pub fn augment_record(
    r: &ImageRecord,
    seed: u64,
    p_h: f64,
    p_v: f64,
) -> Result<(ImageRecord, AppliedFlips)> {
    let flips = draw_flips(seed, p_h, p_v)?;
    Ok((apply_flips(r, flips)?, flips))
}

/// One augmented copy produced by [`expand_records`].
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedCopy {
    pub source_id: alloc::string::String,
    pub record: ImageRecord,
    pub flips: AppliedFlips,
}

/// Dataset-expansion augmentation: `copies` augmented variants per record,
/// each with its own seed drawn in order from a generator seeded by `seed`.
/// Copy ids are `<image_id>__aug<k>`.
pub fn expand_records(
    records: &[ImageRecord],
    seed: u64,
    p_h: f64,
    p_v: f64,
    copies: usize,
) -> Result<Vec<AugmentedCopy>> {
    let mut master = Rng::new(seed);
    let mut out = Vec::with_capacity(records.len() * copies);
    for r in records {
        for k in 0..copies {
            let (mut record, flips) = augment_record(r, master.next_u64(), p_h, p_v)?;
            record.image_id = alloc::format!("{}__aug{}", r.image_id, k);
            out.push(AugmentedCopy {
                source_id: r.image_id.clone(),
                record,
                flips,
            });
        }
    }
    Ok(out)
}
