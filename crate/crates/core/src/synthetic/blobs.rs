use alloc::string::String;
use alloc::vec::Vec;

use super::components::label_components;
use super::GrayImage;
use crate::detection::Detection;
use crate::label::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobParams {
    /// Pixels strictly darker than this are foreground.
    pub intensity_threshold: f64,
    /// Components with at least this many pixels are WBCs.
    pub size_split: u64,
    /// Smaller components are discarded as specks.
    pub min_area: u64,
}

impl Default for BlobParams {
    fn default() -> Self {
        // trophozoite discs top out at 113 px (r = 6), WBC discs start at 317 px (r = 10)
        Self {
            intensity_threshold: 0.5,
            size_split: 200,
            min_area: 4,
        }
    }
}

/// Threshold, label 4-connected regions, classify by area.
///
/// Score is `sqrt((t - m) / t)` for threshold `t` and mean component
/// intensity `m`, so darker blobs score higher.
pub fn detect_blobs(img: &GrayImage, image_id: &str, params: &BlobParams) -> Vec<Detection> {
    let t = params.intensity_threshold;
    let mask: Vec<bool> = img.pixels().iter().map(|&p| p < t).collect();
    let labeling = label_components(&mask, img.width(), img.height());

    let mut sums = alloc::vec![0.0f64; labeling.components.len()];
    for (i, &l) in labeling.labels.iter().enumerate() {
        if l > 0 {
            sums[l as usize - 1] += img.pixels()[i];
        }
    }
    let id = String::from(image_id);
    labeling
        .components
        .iter()
        .zip(sums)
        .filter(|(c, _)| c.area >= params.min_area)
        .map(|(c, sum)| {
            let mean = sum / c.area as f64;
            let contrast = ((t - mean) / t).clamp(0.0, 1.0);
            let label = if c.area >= params.size_split {
                ClassLabel::Wbc
            } else {
                ClassLabel::Trophozoite
            };
            Detection::new(id.clone(), label, c.bbox, libm::sqrt(contrast))
                .expect("score lies in [0, 1]")
        })
        .collect()
}
