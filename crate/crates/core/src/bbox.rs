//! Axis-aligned pixel rectangles.
//!
//! Boxes use the half-open convention: a box covers columns `xmin..xmax` and
//! rows `ymin..ymax`, so its area is `(xmax - xmin) * (ymax - ymin)` pixels.

use core::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawBox", into = "RawBox"))]
pub struct BBox {
    xmin: u32,
    ymin: u32,
    xmax: u32,
    ymax: u32,
}

impl BBox {
    pub fn new(xmin: u32, ymin: u32, xmax: u32, ymax: u32) -> Result<Self> {
        if xmin >= xmax || ymin >= ymax {
            return Err(Error::DegenerateBox {
                xmin,
                ymin,
                xmax,
                ymax,
            });
        }
        Ok(Self {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    #[inline]
    pub fn xmin(&self) -> u32 {
        self.xmin
    }

    #[inline]
    pub fn ymin(&self) -> u32 {
        self.ymin
    }

    #[inline]
    pub fn xmax(&self) -> u32 {
        self.xmax
    }

    #[inline]
    pub fn ymax(&self) -> u32 {
        self.ymax
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.xmax - self.xmin
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    /// Area of the overlap with `other`, zero when the boxes are disjoint.
    pub fn intersection_area(&self, other: &BBox) -> u64 {
        let x0 = self.xmin.max(other.xmin);
        let y0 = self.ymin.max(other.ymin);
        let x1 = self.xmax.min(other.xmax);
        let y1 = self.ymax.min(other.ymax);
        if x0 >= x1 || y0 >= y1 {
            0
        } else {
            u64::from(x1 - x0) * u64::from(y1 - y0)
        }
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.xmax <= width && self.ymax <= height
    }

    pub fn check_within(&self, width: u32, height: u32) -> Result<()> {
        if self.fits_within(width, height) {
            Ok(())
        } else {
            Err(Error::BoxOutOfBounds {
                xmin: self.xmin,
                ymin: self.ymin,
                xmax: self.xmax,
                ymax: self.ymax,
                width,
                height,
            })
        }
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.xmin, self.ymin, self.xmax, self.ymax
        )
    }
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RawBox {
    xmin: u32,
    ymin: u32,
    xmax: u32,
    ymax: u32,
}

#[cfg(feature = "serde")]
impl TryFrom<RawBox> for BBox {
    type Error = Error;

    fn try_from(raw: RawBox) -> Result<Self> {
        BBox::new(raw.xmin, raw.ymin, raw.xmax, raw.ymax)
    }
}

#[cfg(feature = "serde")]
impl From<BBox> for RawBox {
    fn from(b: BBox) -> Self {
        RawBox {
            xmin: b.xmin,
            ymin: b.ymin,
            xmax: b.xmax,
            ymax: b.ymax,
        }
    }
}
