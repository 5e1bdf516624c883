//! Dense rasters with intensities in `[0, 1]`.
//!
//! [`Image`] stores pixels row-major with channels interleaved, which is also
//! the byte order of binary PGM/PPM rasters. All values are `f64`; quantization
//! to 8 bits happens only when writing files.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Differences smaller than this count as equal for the ℓ0 count.
pub const L0_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl Shape {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
        }
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.channels)
    }
}

pub(crate) fn check_shape(expected: Shape, actual: Shape) -> Result<()> {
    if expected != actual {
        return Err(Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        });
    }
    Ok(())
}

/// A `width × height × channels` image with 1 or 3 channels and every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    shape: Shape,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        let shape = Shape::new(width, height, channels);
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty image {shape}")));
        }
        if data.len() != shape.len() {
            return Err(Error::InvalidImage(format!(
                "{shape} needs {} values, got {}",
                shape.len(),
                data.len()
            )));
        }
        if let Some((i, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidImage(format!(
                "value {v} at index {i} is outside [0, 1]"
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Callers guarantee the invariants; used on hot paths that clip explicitly.
    pub(crate) fn from_raw(shape: Shape, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.len(), data.len());
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Self { shape, data }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn width(&self) -> usize {
        self.shape.width
    }

    pub fn height(&self) -> usize {
        self.shape.height
    }

    pub fn channels(&self) -> usize {
        self.shape.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.shape.width + x) * self.shape.channels + c]
    }

    pub fn to_grayscale(&self) -> GrayMap {
        to_grayscale(self)
    }

    pub fn to_grayscale_with(&self, mode: GrayscaleMode) -> GrayMap {
        to_grayscale_with(self, mode)
    }
}

/// A single-channel `width × height` intensity map in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMap {
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) data: Vec<f64>,
}

impl GrayMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} gray map needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidImage("gray value outside [0, 1]".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn into_image(self) -> Image {
        Image::from_raw(Shape::new(self.width, self.height, 1), self.data)
    }
}

/// How color is discarded before computing local entropy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrayscaleMode {
    /// Unweighted mean of the channels.
    #[default]
    Mean,
    /// ITU-R BT.601 luma weights (0.299, 0.587, 0.114).
    Luminance,
}

/// Channel mean per pixel; single-channel input is copied unchanged.
pub fn to_grayscale(img: &Image) -> GrayMap {
    to_grayscale_with(img, GrayscaleMode::Mean)
}

pub fn to_grayscale_with(img: &Image, mode: GrayscaleMode) -> GrayMap {
    let c = img.channels();
    let data = if c == 1 {
        img.data.clone()
    } else {
        img.data
            .chunks_exact(c)
            .map(|px| {
                let v = match mode {
                    GrayscaleMode::Mean => px.iter().sum::<f64>() / c as f64,
                    GrayscaleMode::Luminance => 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2],
                };
                // The mean of values in [0, 1] can round a hair outside the channel range.
                let (lo, hi) = px
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
                        (lo.min(p), hi.max(p))
                    });
                v.clamp(lo, hi)
            })
            .collect()
    };
    GrayMap {
        width: img.width(),
        height: img.height(),
        data,
    }
}

/// Perturbation norms between two same-shaped images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub linf: f64,
    pub l2: f64,
    pub l0: usize,
}

pub fn linf_distance(a: &Image, b: &Image) -> Result<f64> {
    check_shape(a.shape, b.shape)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

pub fn l2_distance(a: &Image, b: &Image) -> Result<f64> {
    check_shape(a.shape, b.shape)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Number of values differing by more than [`L0_EPSILON`].
pub fn l0_count(a: &Image, b: &Image) -> Result<usize> {
    check_shape(a.shape, b.shape)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .filter(|(x, y)| (*x - *y).abs() > L0_EPSILON)
        .count())
}

pub fn norms(a: &Image, b: &Image) -> Result<Norms> {
    Ok(Norms {
        linf: linf_distance(a, b)?,
        l2: l2_distance(a, b)?,
        l0: l0_count(a, b)?,
    })
}

/// Difference `b - a` rescaled affinely so its minimum maps to 0 and its
/// maximum to 1. Identical images give an all-zero image.
pub fn contrast_maximized_difference(a: &Image, b: &Image) -> Result<Image> {
    check_shape(a.shape, b.shape)?;
    let diff: Vec<f64> = a.data.iter().zip(&b.data).map(|(x, y)| y - x).collect();
    let (lo, hi) = diff
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
            (lo.min(d), hi.max(d))
        });
    let span = hi - lo;
    let data = if span > 0.0 {
        diff.iter()
            .map(|d| ((d - lo) / span).clamp(0.0, 1.0))
            .collect()
    } else {
        vec![0.0; diff.len()]
    };
    Ok(Image::from_raw(a.shape, data))
}
