//! Pascal VOC annotation reading and writing.
//!
//! Only `size/{width,height}` and `object/{name,bndbox}` are read; every
//! other element is ignored.

use std::fmt::Write as _;

use quick_xml::escape::escape;
use serde::Deserialize;
use smearkit_core::{BBox, GroundTruthObject, LabelAliases};

use crate::parse_coordinate;

#[derive(Debug, Clone)]
pub struct VocOptions {
    /// Unknown labels and out-of-image boxes are errors when set; otherwise
    /// they are skipped or clamped with a warning.
    pub strict: bool,
    /// Treat `xmin`/`ymin` as 1-based inclusive pixels and shift them to the
    /// 0-based half-open convention.
    pub one_based: bool,
    pub aliases: LabelAliases,
}

impl Default for VocOptions {
    fn default() -> Self {
        Self {
            strict: true,
            one_based: false,
            aliases: LabelAliases::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VocAnnotation {
    pub width: u32,
    pub height: u32,
    pub objects: Vec<GroundTruthObject>,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum VocError {
    #[error("malformed annotation: {0}")]
    Xml(#[from] quick_xml::DeError),
    #[error("object {index}: {message}")]
    Object { index: usize, message: String },
    #[error("size: {0}")]
    Size(String),
}

#[derive(Deserialize)]
struct RawAnnotation {
    size: RawSize,
    #[serde(rename = "object", default)]
    objects: Vec<RawObject>,
}

#[derive(Deserialize)]
struct RawSize {
    width: String,
    height: String,
}

#[derive(Deserialize)]
struct RawObject {
    name: String,
    bndbox: RawBox,
}

#[derive(Deserialize)]
struct RawBox {
    xmin: String,
    ymin: String,
    xmax: String,
    ymax: String,
}

pub fn parse_voc(xml: &str, opts: &VocOptions) -> Result<VocAnnotation, VocError> {
    let raw: RawAnnotation = quick_xml::de::from_str(xml)?;
    let dim = |s: &str, name: &str| -> Result<u32, VocError> {
        match parse_coordinate(s) {
            Ok(v) if v > 0 => Ok(v),
            Ok(_) => Err(VocError::Size(format!("{name} must be positive"))),
            Err(e) => Err(VocError::Size(format!("{name}: {e}"))),
        }
    };
    let width = dim(&raw.size.width, "width")?;
    let height = dim(&raw.size.height, "height")?;

    let mut objects = Vec::with_capacity(raw.objects.len());
    let mut warnings = Vec::new();
    for (index, obj) in raw.objects.iter().enumerate() {
        let fail = |message: String| VocError::Object { index, message };
        let label = match opts.aliases.resolve(&obj.name) {
            Ok(l) => l,
            Err(e) if opts.strict => return Err(fail(e.to_string())),
            Err(e) => {
                warnings.push(format!("object {index}: {e}; skipped"));
                continue;
            }
        };
        let coord =
            |s: &str, name: &str| parse_coordinate(s).map_err(|e| fail(format!("{name}: {e}")));
        let (mut xmin, mut ymin) = (
            coord(&obj.bndbox.xmin, "xmin")?,
            coord(&obj.bndbox.ymin, "ymin")?,
        );
        let (mut xmax, mut ymax) = (
            coord(&obj.bndbox.xmax, "xmax")?,
            coord(&obj.bndbox.ymax, "ymax")?,
        );
        if opts.one_based {
            if xmin == 0 || ymin == 0 {
                return Err(fail("1-based coordinates must be at least 1".into()));
            }
            xmin -= 1;
            ymin -= 1;
        }
        let bbox = BBox::new(xmin, ymin, xmax, ymax).map_err(|e| fail(e.to_string()))?;
        if !bbox.fits_within(width, height) {
            if opts.strict {
                return Err(fail(
                    bbox.check_within(width, height).unwrap_err().to_string(),
                ));
            }
            xmax = xmax.min(width);
            ymax = ymax.min(height);
            match BBox::new(xmin, ymin, xmax, ymax) {
                Ok(clamped) => {
                    warnings.push(format!("object {index}: box {bbox} clamped to {clamped}"));
                    objects.push(GroundTruthObject::new(label, clamped));
                }
                Err(_) => warnings.push(format!(
                    "object {index}: box {bbox} lies outside the image; skipped"
                )),
            }
            continue;
        }
        objects.push(GroundTruthObject::new(label, bbox));
    }
    Ok(VocAnnotation {
        width,
        height,
        objects,
        warnings,
    })
}

/// Renders a minimal VOC document. With `one_based`, `xmin`/`ymin` are
/// written 1-based so that [`parse_voc`] with the same flag reads them back.
pub fn write_voc(
    filename: &str,
    width: u32,
    height: u32,
    objects: &[GroundTruthObject],
    one_based: bool,
) -> String {
    let shift = u32::from(one_based);
    let mut out = String::new();
    out.push_str("<annotation>\n");
    let _ = writeln!(out, "  <filename>{}</filename>", escape(filename));
    let _ = writeln!(
        out,
        "  <size>\n    <width>{width}</width>\n    <height>{height}</height>\n    <depth>1</depth>\n  </size>"
    );
    for o in objects {
        let b = o.bbox;
        let _ = writeln!(
            out,
            "  <object>\n    <name>{}</name>\n    <bndbox>\n      <xmin>{}</xmin>\n      <ymin>{}</ymin>\n      <xmax>{}</xmax>\n      <ymax>{}</ymax>\n    </bndbox>\n  </object>",
            o.label,
            b.xmin() + shift,
            b.ymin() + shift,
            b.xmax(),
            b.ymax()
        );
    }
    out.push_str("</annotation>\n");
    out
}
