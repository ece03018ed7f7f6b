//! Portable graymap (PGM) images, plain (`P2`) and binary (`P5`).

use std::path::Path;

use smearkit_core::synthetic::GrayImage;

use crate::error::{write_file, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmFormat {
    Plain,
    #[default]
    Binary,
}

/// Encodes at 8 bits per pixel.
pub fn encode_pgm(img: &GrayImage, format: PgmFormat) -> Vec<u8> {
    let quantize = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
    let (w, h) = (img.width(), img.height());
    match format {
        PgmFormat::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend(img.pixels().iter().map(|&v| quantize(v)));
            out
        }
        PgmFormat::Plain => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in img.pixels().chunks(w as usize) {
                let line: Vec<String> = row.iter().map(|&v| quantize(v).to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.bytes[start..self.pos]).ok())?
    }

    fn number(&mut self, what: &str) -> std::result::Result<u32, String> {
        self.token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format!("expected {what}"))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic = c.token().ok_or("empty file")?.to_string();
    let width = c.number("width")?;
    let height = c.number("height")?;
    let maxval = c.number("maxval")?;
    if width == 0 || height == 0 {
        return Err("dimensions must be positive".into());
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} outside 1..=65535"));
    }
    let n = width as usize * height as usize;
    let scale = f64::from(maxval);
    let mut pixels = Vec::with_capacity(n);
    match magic.as_str() {
        "P2" => {
            for _ in 0..n {
                let v = c.number("pixel value")?;
                if v > maxval {
                    return Err(format!("pixel value {v} exceeds maxval {maxval}"));
                }
                pixels.push(f64::from(v) / scale);
            }
        }
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            let data = bytes.get(c.pos + 1..).unwrap_or(&[]);
            let bpp = if maxval < 256 { 1 } else { 2 };
            if data.len() < n * bpp {
                return Err(format!(
                    "raster truncated: need {} bytes, found {}",
                    n * bpp,
                    data.len()
                ));
            }
            for i in 0..n {
                let v = if bpp == 1 {
                    u32::from(data[i])
                } else {
                    u32::from(u16::from_be_bytes([data[2 * i], data[2 * i + 1]]))
                };
                if v > maxval {
                    return Err(format!("pixel value {v} exceeds maxval {maxval}"));
                }
                pixels.push(f64::from(v) / scale);
            }
        }
        other => return Err(format!("unsupported magic {other:?}; expected P2 or P5")),
    }
    GrayImage::from_pixels(width, height, pixels).ok_or_else(|| "invalid raster".into())
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes).map_err(|m| Error::parse(path, None, m))
}

pub fn write_pgm(path: &Path, img: &GrayImage, format: PgmFormat) -> Result<()> {
    write_file(path, encode_pgm(img, format))
}
