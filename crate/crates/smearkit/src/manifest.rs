//! Line-oriented dataset manifest.
//!
//! ```text
//! smearkit-manifest 1
//! {"image_id":"a","width":750,"height":750,"metadata":{...},"objects":[...]}
//! ```
//!
//! The first line names the format and schema version. Each following line
//! is one JSON record with keys in this order: `image_id`, `width`,
//! `height`, `metadata` (`slide_id`, `stage_x`, `stage_y`, `phone_zoom`,
//! `objective_magnification`, `stain`; absent values are `null`) and
//! `objects` (each `label`, `xmin`, `ymin`, `xmax`, `ymax`).

use std::path::Path;

use smearkit_core::{Dataset, ImageRecord};

use crate::error::{read_to_string, write_file, Error, Result};

pub const MANIFEST_FORMAT: &str = "smearkit-manifest";
pub const MANIFEST_VERSION: u32 = 1;

pub fn manifest_to_string(d: &Dataset) -> String {
    let mut out = format!("{MANIFEST_FORMAT} {MANIFEST_VERSION}\n");
    for r in d.records() {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_manifest(d: &Dataset, path: &Path) -> Result<()> {
    write_file(path, manifest_to_string(d))
}

/// Parses manifest text; `origin` only labels error messages.
pub fn parse_manifest(text: &str, origin: &Path) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .map(|(_, l)| l)
        .ok_or_else(|| Error::parse(origin, Some(1), "missing manifest header"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MANIFEST_FORMAT) {
        return Err(Error::parse(
            origin,
            Some(1),
            format!("not a {MANIFEST_FORMAT} file"),
        ));
    }
    match parts.next().map(str::parse::<u32>) {
        Some(Ok(MANIFEST_VERSION)) => {}
        Some(Ok(v)) => {
            return Err(Error::parse(
                origin,
                Some(1),
                format!("schema version {v} is not supported (expected {MANIFEST_VERSION})"),
            ))
        }
        _ => {
            return Err(Error::parse(
                origin,
                Some(1),
                "missing or invalid schema version",
            ))
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ImageRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(origin, Some(i + 1), e))?;
        records.push(rec);
    }
    Ok(Dataset::new(records)?)
}

pub fn read_manifest(path: &Path) -> Result<Dataset> {
    parse_manifest(&read_to_string(path)?, path)
}
