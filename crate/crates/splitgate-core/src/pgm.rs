//! Binary PGM (P5, 8-bit) reading and writing.
//!
//! The synthetic corpus is written as PGM and audits accept it natively, so
//! the codec must be bit-exact: `read_pgm(write_pgm(img))` reproduces the
//! image and `write_pgm` emits one canonical byte stream per image.

use thiserror::Error;

use crate::gray::GrayImage;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("not a binary PGM (P5) file")]
    NotP5,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("unsupported maxval {0}, only 8-bit (maxval <= 255) supported")]
    UnsupportedMaxval(u32),
    #[error("pixel data truncated: expected {expected} bytes, found {got}")]
    Truncated { expected: usize, got: usize },
}

/// Serialize as canonical P5: `P5\n<w> <h>\n255\n<pixels>`.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

/// Parse a binary PGM, accepting arbitrary whitespace and `#` comments in the
/// header as the format allows.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(PgmError::NotP5);
    }
    let mut pos = 2;
    let width = read_header_value(bytes, &mut pos)?;
    let height = read_header_value(bytes, &mut pos)?;
    let maxval = read_header_value(bytes, &mut pos)?;
    if maxval > 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(PgmError::BadHeader("missing raster separator".into())),
    }
    let expected = width as usize * height as usize;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            got: raster.len(),
        });
    }
    GrayImage::new(width, height, raster[..expected].to_vec())
        .map_err(|e| PgmError::BadHeader(e.to_string()))
}

fn read_header_value(bytes: &[u8], pos: &mut usize) -> Result<u32, PgmError> {
    // skip whitespace and comment lines
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).map(|b| b.is_ascii_digit()).unwrap_or(false) {
        *pos += 1;
    }
    if *pos == start {
        return Err(PgmError::BadHeader("expected integer".into()));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| PgmError::BadHeader("integer out of range".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let pixels: Vec<u8> = (0..12).map(|i| (i * 20) as u8).collect();
        let img = GrayImage::new(4, 3, pixels).unwrap();
        let bytes = write_pgm(&img);
        assert!(bytes.starts_with(b"P5\n4 3\n255\n"));
        let back = read_pgm(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(write_pgm(&back), bytes);
    }

    #[test]
    fn accepts_comments_and_padding() {
        let mut bytes = b"P5 # a comment\n# another\n 2\t2\n255\n".to_vec();
        bytes.extend_from_slice(&[9, 8, 7, 6]);
        let img = read_pgm(&bytes).unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.pixels(), &[9, 8, 7, 6]);
    }

    #[test]
    fn rejects_ascii_pgm_and_16bit() {
        assert!(matches!(read_pgm(b"P2\n2 2\n255\n"), Err(PgmError::NotP5)));
        let mut bytes = b"P5\n1 1\n65535\n".to_vec();
        bytes.extend_from_slice(&[0, 0]);
        assert!(matches!(
            read_pgm(&bytes),
            Err(PgmError::UnsupportedMaxval(65535))
        ));
    }

    #[test]
    fn rejects_truncated_raster() {
        let bytes = b"P5\n2 2\n255\n\x01\x02".to_vec();
        assert!(matches!(
            read_pgm(&bytes),
            Err(PgmError::Truncated {
                expected: 4,
                got: 2
            })
        ));
    }
}
