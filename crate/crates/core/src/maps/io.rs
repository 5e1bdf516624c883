//! `EMAP1` map files and PGM visualization.
//!
//! ```text
//! EMAP1\n
//! <width> <height>\n
//! width·height little-endian f64, row-major
//! ```

use std::fs;
use std::path::Path;

use super::{EntropyMap, StrengthMap};
use crate::image::Image;
use crate::{Error, Result};

pub const MAP_MAGIC: &[u8] = b"EMAP1\n";

/// The raw content of an `EMAP1` file.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFile {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl MapFile {
    pub fn into_strength_map(self) -> Result<StrengthMap> {
        StrengthMap::new(self.width, self.height, self.data)
    }
}

impl From<&StrengthMap> for MapFile {
    fn from(m: &StrengthMap) -> Self {
        Self {
            width: m.width(),
            height: m.height(),
            data: m.data().to_vec(),
        }
    }
}

impl From<&EntropyMap> for MapFile {
    fn from(m: &EntropyMap) -> Self {
        Self {
            width: m.width(),
            height: m.height(),
            data: m.data().to_vec(),
        }
    }
}

pub fn encode_map(map: &MapFile) -> Vec<u8> {
    let mut out = MAP_MAGIC.to_vec();
    out.extend_from_slice(format!("{} {}\n", map.width, map.height).as_bytes());
    for v in &map.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_map(bytes: &[u8]) -> Result<MapFile> {
    let rest = bytes
        .strip_prefix(MAP_MAGIC)
        .ok_or_else(|| Error::MapFormat("bad magic, expected EMAP1".into()))?;
    let nl = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MapFormat("missing dimension line".into()))?;
    let dims = std::str::from_utf8(&rest[..nl])
        .map_err(|_| Error::MapFormat("dimension line is not ASCII".into()))?;
    let (width, height) = match dims.split(' ').collect::<Vec<_>>().as_slice() {
        [w, h] => (
            w.parse::<usize>()
                .map_err(|_| Error::MapFormat(format!("bad width {w:?}")))?,
            h.parse::<usize>()
                .map_err(|_| Error::MapFormat(format!("bad height {h:?}")))?,
        ),
        _ => return Err(Error::MapFormat(format!("bad dimension line {dims:?}"))),
    };
    let body = &rest[nl + 1..];
    let expected = 8 * width * height;
    if body.len() != expected {
        return Err(Error::MapFormat(format!(
            "expected {expected} bytes of values, got {}",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(MapFile {
        width,
        height,
        data,
    })
}

pub fn save_map(map: impl Into<MapFile>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_map(&map.into()))?;
    Ok(())
}

pub fn load_map(path: impl AsRef<Path>) -> Result<MapFile> {
    decode_map(&fs::read(path)?)
}

/// Strength as a gray image (1 → white).
pub fn strength_to_pgm(m: &StrengthMap) -> Image {
    Image::from_raw(
        crate::Shape::new(m.width(), m.height(), 1),
        m.data().to_vec(),
    )
}

/// Entropy scaled by `1 / S_max`, so the attainable maximum is white.
pub fn entropy_to_pgm(m: &EntropyMap) -> Image {
    let scale = if m.attainable_max() > 0.0 {
        1.0 / m.attainable_max()
    } else {
        0.0
    };
    Image::from_raw(
        crate::Shape::new(m.width(), m.height(), 1),
        m.data().iter().map(|v| (v * scale).clamp(0.0, 1.0)).collect(),
    )
}
