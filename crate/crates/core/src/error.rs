use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate box ({xmin}, {ymin}, {xmax}, {ymax}): need xmin < xmax and ymin < ymax")]
    DegenerateBox {
        xmin: u32,
        ymin: u32,
        xmax: u32,
        ymax: u32,
    },
    #[error("box ({xmin}, {ymin}, {xmax}, {ymax}) exceeds image bounds {width}x{height}")]
    BoxOutOfBounds {
        xmin: u32,
        ymin: u32,
        xmax: u32,
        ymax: u32,
        width: u32,
        height: u32,
    },
    #[error("image dimensions must be positive, got {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("unknown class label {0:?}")]
    UnknownLabel(String),
    #[error("score {0} is outside [0, 1]")]
    InvalidScore(f64),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("capture metadata: {0}")]
    InvalidMetadata(&'static str),
    #[error("duplicate image id {0:?}")]
    DuplicateImageId(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("cannot split by slide: only {0} slide group(s)")]
    TooFewGroups(usize),
    #[error("detections mix image ids {expected:?} and {found:?}")]
    MixedImageIds { expected: String, found: String },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("no class has a defined average precision")]
    NoDefinedAp,
    #[error("film {0:?} has no images")]
    EmptyFilm(String),
    #[error("film {0:?} has zero WBCs counted; density is undefined, count more fields")]
    NoWbcs(String),
    #[error("film sets differ: {0:?} is present on one side only")]
    FilmSetMismatch(String),
    #[error("duplicate film id {0:?}")]
    DuplicateFilm(String),
    #[error("invalid interpretation table: {0}")]
    InvalidInterpretationTable(&'static str),
    #[error("invalid synthetic spec: {0}")]
    InvalidSyntheticSpec(&'static str),
    #[error("placed {placed} of {requested} blobs before exhausting the retry budget")]
    PlacementFailed { placed: usize, requested: usize },
}

/// Checks that `value` lies in the closed unit interval.
pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}
