use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::StrengthMap;
use crate::{Error, Result};

/// Gradient-lattice noise, rescaled affinely to `[0, 1]`.
///
/// The first octave has one lattice cell per `cell_size` pixels; each further
/// octave halves the cell size and the amplitude. Lattice gradients are
/// random unit vectors drawn from a ChaCha stream seeded with `seed`.
pub fn perlin_map(
    width: usize,
    height: usize,
    cell_size: usize,
    octaves: usize,
    seed: u64,
) -> Result<StrengthMap> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!(
            "degenerate noise dimensions {width}x{height}"
        )));
    }
    if cell_size < 2 {
        return Err(Error::InvalidParameter("cell size must be at least 2".into()));
    }
    if octaves < 1 {
        return Err(Error::InvalidParameter("at least one octave is required".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = vec![0.0; width * height];
    let mut cell = cell_size as f64;
    let mut amplitude = 1.0;
    for _ in 0..octaves {
        let lattice = Lattice::random(&mut rng, width as f64 / cell, height as f64 / cell);
        for y in 0..height {
            for x in 0..width {
                // sample at pixel centers so no pixel sits exactly on a lattice node
                let (u, v) = ((x as f64 + 0.5) / cell, (y as f64 + 0.5) / cell);
                raw[y * width + x] += amplitude * lattice.noise(u, v);
            }
        }
        cell /= 2.0;
        amplitude /= 2.0;
    }

    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    let data = if span > 0.0 {
        raw.iter().map(|v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.0; raw.len()]
    };
    Ok(StrengthMap::from_raw(width, height, data))
}

struct Lattice {
    cols: usize,
    gradients: Vec<(f64, f64)>,
}

impl Lattice {
    fn random(rng: &mut ChaCha8Rng, span_x: f64, span_y: f64) -> Self {
        let cols = span_x.ceil() as usize + 2;
        let rows = span_y.ceil() as usize + 2;
        let gradients = (0..cols * rows)
            .map(|_| {
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                (a.cos(), a.sin())
            })
            .collect();
        Self { cols, gradients }
    }

    fn noise(&self, u: f64, v: f64) -> f64 {
        let (i, j) = (u.floor() as usize, v.floor() as usize);
        let (fx, fy) = (u - i as f64, v - j as f64);
        let dot = |di: usize, dj: usize| {
            let (gx, gy) = self.gradients[(j + dj) * self.cols + i + di];
            gx * (fx - di as f64) + gy * (fy - dj as f64)
        };
        let (sx, sy) = (smoothstep(fx), smoothstep(fy));
        let top = lerp(dot(0, 0), dot(1, 0), sx);
        let bottom = lerp(dot(0, 1), dot(1, 1), sx);
        lerp(top, bottom, sy)
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}
