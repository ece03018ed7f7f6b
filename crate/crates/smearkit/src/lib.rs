//! File formats, reports and the command pipeline built on `smearkit-core`.

pub mod commands;
pub mod config;
pub mod detfile;
mod error;
pub mod manifest;
pub mod pgm;
pub mod report;
pub mod voc;

pub use smearkit_core as core;

pub use crate::error::{Error, Location, Result};

/// Parses a pixel coordinate. Decimal values are rounded to the nearest
/// whole pixel (halves away from zero).
pub(crate) fn parse_coordinate(s: &str) -> std::result::Result<u32, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("{s:?} is not a number"))?;
    if !v.is_finite() || v < 0.0 || v.round() > f64::from(u32::MAX) {
        return Err(format!("{s:?} is not a valid pixel coordinate"));
    }
    Ok(v.round() as u32)
}
