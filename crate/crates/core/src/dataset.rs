//! Annotated smear images and the capture parameters recorded with them.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bbox::BBox;
use crate::error::{Error, Result};
use crate::label::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundTruthObject {
    pub label: ClassLabel,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub bbox: BBox,
}

impl GroundTruthObject {
    pub fn new(label: ClassLabel, bbox: BBox) -> Self {
        Self { label, bbox }
    }
}

/// Microscope set-up recorded alongside each image.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CaptureMetadata {
    pub slide_id: String,
    /// Stage micrometer grid reading, x axis.
    pub stage_x: Option<f64>,
    pub stage_y: Option<f64>,
    pub phone_zoom: Option<f64>,
    /// Objective magnification, e.g. 1000 for 1000x.
    pub objective_magnification: Option<u32>,
    pub stain: Option<String>,
}

impl CaptureMetadata {
    pub fn for_slide(slide_id: impl Into<String>) -> Self {
        Self {
            slide_id: slide_id.into(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.slide_id.trim().is_empty() {
            return Err(Error::InvalidMetadata("slide_id is empty"));
        }
        for (name, v) in [
            ("stage_x is negative or not finite", self.stage_x),
            ("stage_y is negative or not finite", self.stage_y),
            ("phone_zoom is negative or not finite", self.phone_zoom),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidMetadata(name));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImageRecord {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub metadata: CaptureMetadata,
    pub objects: Vec<GroundTruthObject>,
}

impl ImageRecord {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidDimensions {
                width: self.width,
                height: self.height,
            });
        }
        self.metadata.validate()?;
        for obj in &self.objects {
            obj.bbox.check_within(self.width, self.height)?;
        }
        Ok(())
    }

    pub fn count(&self, label: ClassLabel) -> usize {
        self.objects.iter().filter(|o| o.label == label).count()
    }
}

/// A validated collection of image records with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    records: Vec<ImageRecord>,
}

impl Dataset {
    pub fn new(records: Vec<ImageRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &records {
            r.validate()?;
            if !seen.insert(r.image_id.as_str()) {
                return Err(Error::DuplicateImageId(r.image_id.clone()));
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<ImageRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, image_id: &str) -> Option<&ImageRecord> {
        self.records.iter().find(|r| r.image_id == image_id)
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.get(image_id).is_some()
    }

    /// Number of annotated objects of each class, in [`ClassLabel::ALL`] order.
    pub fn class_histogram(&self) -> [usize; 2] {
        let mut h = [0usize; 2];
        for r in &self.records {
            for o in &r.objects {
                h[o.label as usize] += 1;
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn record(id: &str) -> ImageRecord {
        ImageRecord {
            image_id: id.into(),
            width: 50,
            height: 40,
            metadata: CaptureMetadata::for_slide("s1"),
            objects: vec![GroundTruthObject::new(
                ClassLabel::Wbc,
                BBox::new(0, 0, 50, 40).unwrap(),
            )],
        }
    }

    #[test]
    fn rejects_duplicate_ids() {
        let err = Dataset::new(vec![record("a"), record("a")]).unwrap_err();
        assert_eq!(err, Error::DuplicateImageId("a".into()));
    }

    #[test]
    fn rejects_box_outside_image() {
        let mut r = record("a");
        r.objects.push(GroundTruthObject::new(
            ClassLabel::Trophozoite,
            BBox::new(40, 30, 51, 40).unwrap(),
        ));
        assert!(matches!(
            Dataset::new(vec![r]),
            Err(Error::BoxOutOfBounds { .. })
        ));
    }

    #[test]
    fn rejects_bad_metadata() {
        let mut r = record("a");
        r.metadata.slide_id = " ".into();
        assert!(Dataset::new(vec![r.clone()]).is_err());
        r.metadata.slide_id = "s".into();
        r.metadata.stage_x = Some(-1.0);
        assert!(Dataset::new(vec![r]).is_err());
    }

    #[test]
    fn histogram() {
        let d = Dataset::new(vec![record("a"), record("b")]).unwrap();
        assert_eq!(d.class_histogram(), [0, 2]);
    }
}
