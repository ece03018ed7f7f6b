//! Detection file format.
//!
//! ```text
//! smearkit-detections 1 image_id,label,score,xmin,ymin,xmax,ymax
//! img001,trophozoite,0.93,10,20,30,40
//! ```
//!
//! One header line (format, version, column list), then one comma-separated
//! detection per line in exactly that column order. Labels go through the
//! alias map; coordinates may be decimal and are rounded to whole pixels.

use std::fmt::Write as _;
use std::path::Path;

use smearkit_core::{BBox, Detection, DetectionSet, LabelAliases};

use crate::error::{read_to_string, write_file, Error, Result};
use crate::parse_coordinate;

pub const DETECTIONS_FORMAT: &str = "smearkit-detections";
pub const DETECTIONS_VERSION: u32 = 1;
pub const DETECTION_COLUMNS: &str = "image_id,label,score,xmin,ymin,xmax,ymax";

pub fn parse_detections(text: &str, aliases: &LabelAliases, origin: &Path) -> Result<DetectionSet> {
    let mut set = DetectionSet::new();
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Ok(set);
    };
    let expected = format!("{DETECTIONS_FORMAT} {DETECTIONS_VERSION} {DETECTION_COLUMNS}");
    if header.trim() != expected {
        let message = if header.starts_with(DETECTIONS_FORMAT) {
            format!("unsupported header {header:?}; expected {expected:?}")
        } else {
            format!("missing header; expected {expected:?}")
        };
        return Err(Error::parse(origin, Some(1), message));
    }
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = Some(i + 1);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [image_id, label, score, xmin, ymin, xmax, ymax] = fields[..] else {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected 7 fields, found {}", fields.len()),
            ));
        };
        if image_id.is_empty() {
            return Err(Error::parse(origin, lineno, "empty image_id"));
        }
        let bad = |m: String| Error::parse(origin, lineno, m);
        let label = aliases.resolve(label).map_err(|e| bad(e.to_string()))?;
        let score: f64 = score
            .parse()
            .map_err(|_| bad(format!("score {score:?} is not a number")))?;
        let coord =
            |s: &str, name: &str| parse_coordinate(s).map_err(|e| bad(format!("{name}: {e}")));
        let bbox = BBox::new(
            coord(xmin, "xmin")?,
            coord(ymin, "ymin")?,
            coord(xmax, "xmax")?,
            coord(ymax, "ymax")?,
        )
        .map_err(|e| bad(e.to_string()))?;
        let det = Detection::new(image_id, label, bbox, score).map_err(|e| bad(e.to_string()))?;
        set.push(det);
    }
    Ok(set)
}

pub fn read_detections(path: &Path, aliases: &LabelAliases) -> Result<DetectionSet> {
    parse_detections(&read_to_string(path)?, aliases, path)
}

pub fn detections_to_string<'a>(dets: impl IntoIterator<Item = &'a Detection>) -> Result<String> {
    let mut out = format!("{DETECTIONS_FORMAT} {DETECTIONS_VERSION} {DETECTION_COLUMNS}\n");
    for d in dets {
        if d.image_id.is_empty() || d.image_id.contains([',', '\n', '\r']) {
            return Err(Error::Validation(format!(
                "image id {:?} cannot be written to a detection file",
                d.image_id
            )));
        }
        let b = d.bbox;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            d.image_id,
            d.label,
            d.score(),
            b.xmin(),
            b.ymin(),
            b.xmax(),
            b.ymax()
        );
    }
    Ok(out)
}

pub fn write_detections<'a>(
    path: &Path,
    dets: impl IntoIterator<Item = &'a Detection>,
) -> Result<()> {
    write_file(path, detections_to_string(dets)?)
}
