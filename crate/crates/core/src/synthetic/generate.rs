use alloc::format;
use alloc::vec::Vec;

use super::GrayImage;
use crate::bbox::BBox;
use crate::dataset::{CaptureMetadata, GroundTruthObject, ImageRecord};
use crate::error::{Error, Result};
use crate::label::ClassLabel;
use crate::rng::Rng;

pub const BACKGROUND_INTENSITY: f64 = 0.85;
pub const TROPHOZOITE_INTENSITY: f64 = 0.30;
pub const WBC_INTENSITY: f64 = 0.20;

/// Minimum blank pixels between the bounding squares of two blobs under
/// [`OverlapPolicy::Forbid`]; keeps discs from touching under 4-connectivity.
const MIN_GAP: u32 = 2;
const PLACEMENT_ATTEMPTS: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapPolicy {
    #[default]
    Forbid,
    Allow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub width: u32,
    pub height: u32,
    pub n_trophozoites: u32,
    pub n_wbcs: u32,
    /// Inclusive disc radius range in pixels.
    pub trophozoite_radius: (u32, u32),
    pub wbc_radius: (u32, u32),
    /// Uniform noise amplitude as a fraction of half the intensity range.
    pub noise: f64,
    pub overlap: OverlapPolicy,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            n_trophozoites: 5,
            n_wbcs: 2,
            trophozoite_radius: (3, 6),
            wbc_radius: (10, 15),
            noise: 0.0,
            overlap: OverlapPolicy::Forbid,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m| Err(Error::InvalidSyntheticSpec(m));
        let (tl, th) = self.trophozoite_radius;
        let (wl, wh) = self.wbc_radius;
        if self.width == 0 || self.height == 0 {
            return fail("image dimensions must be positive");
        }
        if tl == 0 || tl > th || wl > wh {
            return fail("radius ranges must be non-empty with positive radii");
        }
        if wl <= th {
            return fail("WBC radii must all exceed trophozoite radii");
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return fail("noise must lie in [0, 1]");
        }
        let side = self.width.min(self.height);
        let largest = if self.n_wbcs > 0 { wh } else { th };
        if 2 * largest + 1 > side {
            return fail("blobs do not fit inside the image");
        }
        Ok(())
    }
}

fn disc_box(cx: u32, cy: u32, r: u32) -> BBox {
    BBox::new(cx - r, cy - r, cx + r + 1, cy + r + 1).expect("disc box is non-empty")
}

fn separated(a: &BBox, b: &BBox) -> bool {
    a.xmax() + MIN_GAP <= b.xmin()
        || b.xmax() + MIN_GAP <= a.xmin()
        || a.ymax() + MIN_GAP <= b.ymin()
        || b.ymax() + MIN_GAP <= a.ymin()
}

/// Renders dark filled discs on a light background.
///
/// WBCs are placed before trophozoites. The returned record lists each disc's
/// bounding square, which equals the extent of its rendered pixels.
pub fn generate(spec: &SyntheticSpec) -> Result<(GrayImage, ImageRecord)> {
    spec.validate()?;
    let mut rng = Rng::new(spec.seed);
    let requested = (spec.n_wbcs + spec.n_trophozoites) as usize;
    let mut discs: Vec<(u32, u32, u32, ClassLabel)> = Vec::with_capacity(requested);
    let mut boxes: Vec<BBox> = Vec::with_capacity(requested);

    let plan = core::iter::repeat_n((ClassLabel::Wbc, spec.wbc_radius), spec.n_wbcs as usize)
        .chain(core::iter::repeat_n(
            (ClassLabel::Trophozoite, spec.trophozoite_radius),
            spec.n_trophozoites as usize,
        ));
    for (label, (rmin, rmax)) in plan {
        let mut placed = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let r = rng.range_inclusive(rmin, rmax);
            let cx = rng.range_inclusive(r, spec.width - r - 1);
            let cy = rng.range_inclusive(r, spec.height - r - 1);
            let b = disc_box(cx, cy, r);
            if spec.overlap == OverlapPolicy::Forbid && !boxes.iter().all(|o| separated(o, &b)) {
                continue;
            }
            discs.push((cx, cy, r, label));
            boxes.push(b);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::PlacementFailed {
                placed: discs.len(),
                requested,
            });
        }
    }

    let mut img = GrayImage::filled(spec.width, spec.height, BACKGROUND_INTENSITY);
    for &(cx, cy, r, label) in &discs {
        let level = match label {
            ClassLabel::Wbc => WBC_INTENSITY,
            ClassLabel::Trophozoite => TROPHOZOITE_INTENSITY,
        };
        let r2 = i64::from(r) * i64::from(r);
        for y in cy - r..=cy + r {
            for x in cx - r..=cx + r {
                let (dx, dy) = (i64::from(x) - i64::from(cx), i64::from(y) - i64::from(cy));
                if dx * dx + dy * dy <= r2 {
                    img.set(x, y, level);
                }
            }
        }
    }
    if spec.noise > 0.0 {
        let amplitude = spec.noise * 0.5;
        for y in 0..spec.height {
            for x in 0..spec.width {
                let v = img.get(x, y) + amplitude * (2.0 * rng.unit() - 1.0);
                img.set(x, y, v);
            }
        }
    }

    let record = ImageRecord {
        image_id: format!("synth-{}", spec.seed),
        width: spec.width,
        height: spec.height,
        metadata: CaptureMetadata::for_slide("synthetic"),
        objects: discs
            .iter()
            .zip(&boxes)
            .map(|(&(_, _, _, label), &b)| GroundTruthObject::new(label, b))
            .collect(),
    };
    Ok((img, record))
}
