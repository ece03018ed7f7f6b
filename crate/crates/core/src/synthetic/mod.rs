//! Synthetic smears with exact ground truth, and a classical blob detector
//! that can stand in for a trained model when exercising the pipeline.

mod blobs;
mod components;
mod generate;

use alloc::vec::Vec;

pub use self::blobs::{detect_blobs, BlobParams};
pub use self::components::{label_components, Component, Labeling};
pub use self::generate::{generate, OverlapPolicy, SyntheticSpec};

/// Row-major grayscale image with intensities in `[0, 1]`; 0 is black.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn filled(width: u32, height: u32, value: f64) -> Self {
        Self {
            width,
            height,
            pixels: alloc::vec![value; width as usize * height as usize],
        }
    }

    /// Returns `None` if the buffer length does not match the dimensions or
    /// a value lies outside `[0, 1]`.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<f64>) -> Option<Self> {
        if pixels.len() != width as usize * height as usize
            || pixels.iter().any(|p| !(0.0..=1.0).contains(p))
        {
            return None;
        }
        Some(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: f64) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = v.clamp(0.0, 1.0);
    }
}
