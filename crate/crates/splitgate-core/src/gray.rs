//! 8-bit grayscale image carrier shared by hashing, decoding and synthesis.

use std::path::Path;

use thiserror::Error;

use crate::pgm;

/// Row-major 8-bit luminance image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

#[derive(Debug, Error)]
pub enum GrayError {
    #[error("pixel buffer has {got} bytes, expected {expected} ({width}x{height})")]
    DimensionMismatch {
        width: u32,
        height: u32,
        expected: usize,
        got: usize,
    },
}

/// Failure to turn a file into a `GrayImage`.
#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad pgm file {path}: {source}")]
    Pgm {
        path: String,
        source: pgm::PgmError,
    },
    #[error("decode failed for {path}: {source}")]
    Image {
        path: String,
        source: image::ImageError,
    },
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, GrayError> {
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(GrayError::DimensionMismatch {
                width,
                height,
                expected,
                got: pixels.len(),
            });
        }
        Ok(GrayImage {
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

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Mirror the image left-to-right.
    pub fn flipped_horizontal(&self) -> GrayImage {
        let w = self.width as usize;
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks_exact(w) {
            pixels.extend(row.iter().rev());
        }
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// Downsample to a `rows` x `cols` grid by block averaging.
    ///
    /// Cell (r, c) covers source rows `floor(r*H/rows)..floor((r+1)*H/rows)`
    /// and the analogous column range; the cell value is the arithmetic mean
    /// of the covered pixels rounded half up. Returns `None` when the image
    /// is smaller than the grid (an empty cell would otherwise appear).
    pub fn block_means(&self, rows: u32, cols: u32) -> Option<Vec<u8>> {
        if self.width < cols || self.height < rows {
            return None;
        }
        let (w, h) = (self.width as u64, self.height as u64);
        let mut out = Vec::with_capacity(rows as usize * cols as usize);
        for r in 0..rows as u64 {
            let y0 = (r * h / rows as u64) as usize;
            let y1 = ((r + 1) * h / rows as u64) as usize;
            for c in 0..cols as u64 {
                let x0 = (c * w / cols as u64) as usize;
                let x1 = ((c + 1) * w / cols as u64) as usize;
                let mut sum: u64 = 0;
                for y in y0..y1 {
                    let row = &self.pixels[y * w as usize..(y + 1) * w as usize];
                    sum += row[x0..x1].iter().map(|&p| p as u64).sum::<u64>();
                }
                let count = ((y1 - y0) * (x1 - x0)) as u64;
                out.push(((sum + count / 2) / count) as u8);
            }
        }
        Some(out)
    }
}

/// Integer BT.601 luminance, rounded half up.
pub fn luminance(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Load any supported image file as 8-bit grayscale.
///
/// PGM (P5) files are read natively and bit-exactly; everything else goes
/// through the decode boundary and color inputs are reduced with the integer
/// [`luminance`] conversion.
pub fn load_gray(path: &Path) -> Result<GrayImage, DecodeError> {
    let is_pgm = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("pgm"))
        .unwrap_or(false);
    let display = path.display().to_string();
    if is_pgm {
        let bytes = std::fs::read(path).map_err(|source| DecodeError::Io {
            path: display.clone(),
            source,
        })?;
        return pgm::read_pgm(&bytes).map_err(|source| DecodeError::Pgm {
            path: display,
            source,
        });
    }
    let decoded = image::open(path).map_err(|source| DecodeError::Image {
        path: display,
        source,
    })?;
    Ok(from_dynamic(decoded))
}

fn from_dynamic(img: image::DynamicImage) -> GrayImage {
    match img {
        image::DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            GrayImage::new(w, h, g.into_raw()).expect("decoder produced consistent buffer")
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = rgb.dimensions();
            let pixels = rgb
                .pixels()
                .map(|p| luminance(p.0[0], p.0[1], p.0[2]))
                .collect();
            GrayImage::new(w, h, pixels).expect("decoder produced consistent buffer")
        }
    }
}
