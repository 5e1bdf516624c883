//! Binary PGM (`P5`) and PPM (`P6`) with maxval 255.
//!
//! Byte `b` decodes to `b / 255`. Encoding rounds `v * 255` to the nearest
//! level with ties going up, so decoding then re-encoding an 8-bit file is the
//! identity.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::image::{Image, Shape};
use crate::Result;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PnmError {
    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },

    #[error("unsupported maxval {maxval} at byte {offset} (only 255 is supported)")]
    UnsupportedMaxval { offset: usize, maxval: u32 },

    #[error("truncated raster starting at byte {offset}: expected {expected} bytes, found {actual}")]
    Truncated {
        offset: usize,
        expected: usize,
        actual: usize,
    },
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn malformed(&self, reason: impl Into<String>) -> PnmError {
        PnmError::MalformedHeader {
            offset: self.pos,
            reason: reason.into(),
        }
    }

    /// Skips whitespace and `#` comments (which run to the end of the line).
    fn skip_separators(&mut self) -> Result<(), PnmError> {
        let start = self.pos;
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        if self.pos == start {
            return Err(self.malformed("expected whitespace"));
        }
        Ok(())
    }

    fn number(&mut self, what: &str) -> Result<(u32, usize), PnmError> {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_digit())
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.malformed(format!("expected {what}")));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        let value = text.parse::<u32>().map_err(|_| PnmError::MalformedHeader {
            offset: start,
            reason: format!("{what} {text} does not fit in 32 bits"),
        })?;
        Ok((value, start))
    }
}

/// Decodes a P5/P6 byte buffer.
pub fn decode(bytes: &[u8]) -> Result<Image, PnmError> {
    let mut r = HeaderReader { bytes, pos: 0 };
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(r.malformed("expected magic P5 or P6")),
    };
    r.pos = 2;
    r.skip_separators()?;
    let (width, width_at) = r.number("width")?;
    r.skip_separators()?;
    let (height, height_at) = r.number("height")?;
    r.skip_separators()?;
    let (maxval, maxval_at) = r.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PnmError::MalformedHeader {
            offset: if width == 0 { width_at } else { height_at },
            reason: "zero dimension".into(),
        });
    }
    if maxval != 255 {
        return Err(PnmError::UnsupportedMaxval {
            offset: maxval_at,
            maxval,
        });
    }
    match bytes.get(r.pos) {
        Some(b) if b.is_ascii_whitespace() => r.pos += 1,
        _ => return Err(r.malformed("expected a single whitespace byte before the raster")),
    }

    let shape = Shape::new(width as usize, height as usize, channels);
    let raster = &bytes[r.pos..];
    if raster.len() < shape.len() {
        return Err(PnmError::Truncated {
            offset: r.pos,
            expected: shape.len(),
            actual: raster.len(),
        });
    }
    let data = raster[..shape.len()]
        .iter()
        .map(|&b| f64::from(b) / 255.0)
        .collect();
    Ok(Image::from_raw(shape, data))
}

/// Quantizes a value in `[0, 1]` to one of 256 levels, ties rounding up.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

pub fn encode(img: &Image) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| quantize(v)));
    out
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let bytes = fs::read(path)?;
    Ok(decode(&bytes)?)
}

pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decodes_extreme_and_mid_bytes() {
        let img = decode(b"P5 3 1 255\n\xff\x00\x80").unwrap();
        assert_eq!(img.shape(), Shape::new(3, 1, 1));
        assert_eq!(img.data()[0], 1.0);
        assert_eq!(img.data()[1], 0.0);
        assert_eq!(img.data()[2], 128.0 / 255.0);
        assert!((img.data()[2] - 0.50196).abs() < 1e-5);
    }

    #[test]
    fn accepts_comments_in_header() {
        let img = decode(b"P6\n# made by hand\n1 1 # trailing\n255\n\x01\x02\x03").unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.data()[2], 3.0 / 255.0);
    }

    #[test]
    fn rejects_bad_magic() {
        assert_eq!(
            decode(b"P2 1 1 255\n0"),
            Err(PnmError::MalformedHeader {
                offset: 0,
                reason: "expected magic P5 or P6".into()
            })
        );
    }

    #[test]
    fn rejects_unsupported_maxval() {
        assert_eq!(
            decode(b"P5 1 1 65535\n\0\0"),
            Err(PnmError::UnsupportedMaxval {
                offset: 7,
                maxval: 65535
            })
        );
    }

    #[test]
    fn rejects_truncated_raster() {
        assert_eq!(
            decode(b"P5 2 2 255\n\0\0\0"),
            Err(PnmError::Truncated {
                offset: 11,
                expected: 4,
                actual: 3
            })
        );
    }

    #[test]
    fn rejects_missing_numbers() {
        let err = decode(b"P5 x 2 255\n").unwrap_err();
        assert!(matches!(err, PnmError::MalformedHeader { offset: 3, .. }), "{err}");
        assert!(matches!(
            decode(b"P5 0 2 255\n").unwrap_err(),
            PnmError::MalformedHeader { offset: 3, .. }
        ));
    }

    #[test]
    fn quantize_rounds_ties_up() {
        assert_eq!(quantize(0.5), 128); // 127.5 → 128
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(127.4 / 255.0), 127);
    }

    #[test]
    fn save_and_load_through_filesystem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ppm");
        let img = Image::new(2, 1, 3, (0..6).map(|b| b as f64 / 255.0).collect()).unwrap();
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    proptest! {
        #[test]
        fn quantized_images_round_trip_exactly(
            (w, h, c, bytes) in (1usize..6, 1usize..6, prop_oneof![Just(1usize), Just(3usize)])
                .prop_flat_map(|(w, h, c)| (Just(w), Just(h), Just(c), prop::collection::vec(any::<u8>(), w * h * c)))
        ) {
            let data = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
            let img = Image::new(w, h, c, data).unwrap();
            let back = decode(&encode(&img)).unwrap();
            prop_assert_eq!(&back, &img);
            prop_assert_eq!(encode(&back), encode(&img));
        }
    }
}
