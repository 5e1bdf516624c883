//! Labelled image sets.
//!
//! On disk a dataset is a directory with one subdirectory per class, named by
//! the integer label, holding PGM/PPM files:
//!
//! ```text
//! data/
//!   0/ a.pgm b.pgm ...
//!   1/ ...
//! ```
//!
//! [`shapes`] generates the procedural ten-class set used to train the
//! reference model: textured geometric figures on smooth, lightly noisy
//! backgrounds, so that local entropy is high on and around the figure and
//! low elsewhere.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{check_shape, Image, Shape};
use crate::pnm::{self, quantize};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Image,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    shape: Shape,
    classes: usize,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(shape: Shape, classes: usize, samples: Vec<Sample>) -> Result<Self> {
        for s in &samples {
            check_shape(shape, s.image.shape())?;
            if s.label >= classes {
                return Err(Error::LabelOutOfRange {
                    label: s.label,
                    classes,
                });
            }
        }
        Ok(Self {
            shape,
            classes,
            samples,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Reads the class-per-directory layout. Subdirectories that are not
    /// integers are ignored; files are read in name order.
    pub fn load_dir(root: impl AsRef<Path>) -> Result<Self> {
        let mut classes: Vec<(usize, std::path::PathBuf)> = Vec::new();
        for entry in fs::read_dir(root)? {
            let entry = entry?;
            if !entry.file_type()?.is_dir() {
                continue;
            }
            if let Some(label) = entry.file_name().to_str().and_then(|n| n.parse().ok()) {
                classes.push((label, entry.path()));
            }
        }
        classes.sort();
        let mut samples = Vec::new();
        for (label, dir) in &classes {
            let mut files: Vec<_> = fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    matches!(
                        p.extension().and_then(|e| e.to_str()),
                        Some("pgm" | "ppm" | "pnm")
                    )
                })
                .collect();
            files.sort();
            for f in files {
                samples.push(Sample {
                    image: pnm::load_image(&f)?,
                    label: *label,
                });
            }
        }
        let first = samples.first().ok_or(Error::EmptyDataset)?;
        let shape = first.image.shape();
        let n_classes = classes.last().map_or(0, |(l, _)| l + 1);
        Self::new(shape, n_classes, samples)
    }

    /// Writes the class-per-directory layout, files named by sample index.
    pub fn save_dir(&self, root: impl AsRef<Path>) -> Result<()> {
        let root = root.as_ref();
        let ext = if self.shape.channels == 1 { "pgm" } else { "ppm" };
        for (i, s) in self.samples.iter().enumerate() {
            let dir = root.join(s.label.to_string());
            fs::create_dir_all(&dir)?;
            pnm::save_image(&s.image, dir.join(format!("{i:05}.{ext}")))?;
        }
        Ok(())
    }
}

pub const SHAPE_CLASSES: usize = 10;

pub const SHAPE_NAMES: [&str; SHAPE_CLASSES] = [
    "disk",
    "square",
    "triangle",
    "horizontal bar",
    "vertical bar",
    "plus",
    "ring",
    "diagonal cross",
    "twin dots",
    "frame",
];

/// `per_class` images of each of the ten figure classes at 28×28×1, in
/// interleaved class order, quantized to 8 bits.
pub fn shapes(per_class: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(per_class * SHAPE_CLASSES);
    for _ in 0..per_class {
        for label in 0..SHAPE_CLASSES {
            samples.push(Sample {
                image: render_shape(label, &mut rng),
                label,
            });
        }
    }
    Dataset::new(Shape::new(28, 28, 1), SHAPE_CLASSES, samples).expect("generated samples are valid")
}

fn render_shape(label: usize, rng: &mut ChaCha8Rng) -> Image {
    const N: usize = 28;
    let cx = rng.random_range(11.0..17.0);
    let cy = rng.random_range(11.0..17.0);
    let s: f64 = rng.random_range(6.5..9.5);
    let bg: f64 = rng.random_range(0.25..0.75);
    let contrast: f64 = rng.random_range(0.25..0.4);
    let fg = if bg + contrast <= 0.9 && (bg - contrast < 0.1 || rng.random::<bool>()) {
        bg + contrast
    } else {
        bg - contrast
    };
    let (gx, gy) = (rng.random_range(-0.006..0.006), rng.random_range(-0.006..0.006));
    let texture = rng.random_range(0.1..0.18);

    let inside = |x: f64, y: f64| -> bool {
        let (dx, dy) = (x - cx, y - cy);
        let r = (dx * dx + dy * dy).sqrt();
        match label {
            0 => r <= s,
            1 => dx.abs() <= 0.8 * s && dy.abs() <= 0.8 * s,
            2 => dy <= 0.8 * s && dy >= -s && dx.abs() <= (dy + s) * 0.55,
            3 => dx.abs() <= 1.2 * s && dy.abs() <= 0.3 * s,
            4 => dy.abs() <= 1.2 * s && dx.abs() <= 0.3 * s,
            5 => (dx.abs() <= 0.25 * s && dy.abs() <= s) || (dy.abs() <= 0.25 * s && dx.abs() <= s),
            6 => r <= s && r >= 0.55 * s,
            7 => {
                dx.abs() <= s && dy.abs() <= s && ((dx - dy).abs() <= 0.35 * s || (dx + dy).abs() <= 0.35 * s)
            }
            8 => {
                let r1 = ((dx - 0.6 * s).powi(2) + dy * dy).sqrt();
                let r2 = ((dx + 0.6 * s).powi(2) + dy * dy).sqrt();
                r1 <= 0.42 * s || r2 <= 0.42 * s
            }
            _ => {
                let m = dx.abs().max(dy.abs());
                m <= s && m >= 0.65 * s
            }
        }
    };

    let mut data = Vec::with_capacity(N * N);
    for y in 0..N {
        for x in 0..N {
            let (fx, fy) = (x as f64, y as f64);
            let base = bg + gx * (fx - 14.0) + gy * (fy - 14.0) + rng.random_range(-0.008..0.008);
            let v = if inside(fx, fy) {
                fg + rng.random_range(-texture..texture)
            } else {
                base
            };
            data.push(f64::from(quantize(v)) / 255.0);
        }
    }
    Image::new(N, N, 1, data).expect("quantized values are in range")
}
