use super::EntropyMap;
use crate::{Error, GrayMap, Result};

pub const DEFAULT_RADIUS: usize = 5;
pub const DEFAULT_BINS: usize = 256;

/// Occurrence ratios of the quantized intensities in one window.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalHistogram {
    ratios: Vec<f64>,
}

impl LocalHistogram {
    pub fn from_counts(counts: &[u32]) -> Self {
        let total: u32 = counts.iter().sum();
        let ratios = counts
            .iter()
            .map(|&c| if total == 0 { 0.0 } else { f64::from(c) / f64::from(total) })
            .collect();
        Self { ratios }
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Shannon entropy in bits, with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .ratios
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    }
}

/// Bin of `v` among `bins` equal-width bins over `[0, 1]`; 1.0 lands in the top bin.
pub(crate) fn bin_of(v: f64, bins: usize) -> usize {
    ((v * bins as f64) as usize).min(bins - 1)
}

/// `log2(min(bins, (2r+1)^2))`: the largest entropy a window can hold.
pub fn max_window_entropy(radius: usize, bins: usize) -> f64 {
    let side = 2 * radius + 1;
    (bins.min(side * side) as f64).log2()
}

/// Shannon entropy of the quantized gray levels in the square window of side
/// `2·radius + 1` around every pixel. Windows are truncated at the borders,
/// so border pixels only see real pixels.
pub fn local_entropy(g: &GrayMap, radius: usize, bins: usize) -> Result<EntropyMap> {
    if radius < 1 {
        return Err(Error::InvalidParameter("entropy radius must be at least 1".into()));
    }
    if bins < 2 {
        return Err(Error::InvalidParameter("entropy needs at least 2 bins".into()));
    }
    let (w, h) = (g.width(), g.height());
    let binned: Vec<usize> = g.data().iter().map(|&v| bin_of(v, bins)).collect();

    let mut counts = vec![0u32; bins];
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let y0 = y.saturating_sub(radius);
        let y1 = (y + radius + 1).min(h);
        counts.fill(0);
        let column = |counts: &mut [u32], x: usize, add: bool| {
            for yy in y0..y1 {
                let b = binned[yy * w + x];
                if add {
                    counts[b] += 1;
                } else {
                    counts[b] -= 1;
                }
            }
        };
        for x in 0..radius.min(w) {
            column(&mut counts, x, true);
        }
        for x in 0..w {
            let entering = x + radius;
            if entering < w {
                column(&mut counts, entering, true);
            }
            if x > radius {
                column(&mut counts, x - radius - 1, false);
            }
            let n = ((y1 - y0) * ((x + radius + 1).min(w) - x.saturating_sub(radius))) as f64;
            let mut entropy = 0.0;
            for &c in counts.iter().filter(|&&c| c > 0) {
                let p = f64::from(c) / n;
                entropy -= p * p.log2();
            }
            out.push(entropy.max(0.0));
        }
    }
    EntropyMap::new(w, h, out, max_window_entropy(radius, bins))
}
