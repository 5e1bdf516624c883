//! Per-pixel attack strength.
//!
//! A [`StrengthMap`] holds one magnitude in `[0, 1]` per pixel and is
//! broadcast over color channels when an attack applies it. Its mean is the
//! relative total strength κ; for a binary map that is the fraction of
//! attacked pixels.
//!
//! Maps come from local entropy ([`local_entropy`] followed by [`phi`]), from
//! Perlin noise ([`perlin_map`]), or from any `[0, 1]` raster, and can be
//! reshaped with [`scale_brightness`], [`dilate`]/[`erode`] and
//! [`adjust_to_kappa`].

mod entropy;
mod io;
mod morphology;
mod perlin;

use serde::{Deserialize, Serialize};

use crate::{Error, GrayMap, Result};

pub use entropy::{local_entropy, max_window_entropy, LocalHistogram, DEFAULT_BINS, DEFAULT_RADIUS};
pub use io::{
    decode_map, encode_map, entropy_to_pgm, load_map, save_map, strength_to_pgm, MapFile,
    MAP_MAGIC,
};
pub use morphology::{dilate, erode};
pub use perlin::perlin_map;

/// Entropy threshold (bits) used to binarize the entropy map by default.
pub const DEFAULT_ENTROPY_THRESHOLD: f64 = 4.2;

/// Default tolerance of [`adjust_to_kappa`].
pub const DEFAULT_KAPPA_TOLERANCE: f64 = 0.005;

const BISECTION_STEPS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct StrengthMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl StrengthMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "{width}x{height} strength map needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "strength value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Self {
            width,
            height,
            data,
        }
    }

    /// Uses a gray raster directly as a strength map.
    pub fn from_gray(g: &GrayMap) -> Self {
        Self::from_raw(g.width(), g.height(), g.data().to_vec())
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

    pub fn kappa(&self) -> f64 {
        kappa(self)
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub(crate) fn check_binary(&self) -> Result<()> {
        match self
            .data
            .iter()
            .enumerate()
            .find(|(_, &v)| v != 0.0 && v != 1.0)
        {
            Some((index, &value)) => Err(Error::NonBinaryMap { index, value }),
            None => Ok(()),
        }
    }
}

/// Local Shannon entropies in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
    /// `log2(min(bins, full window size))`, the largest value any pixel can take.
    attainable_max: f64,
}

impl EntropyMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>, attainable_max: f64) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidParameter("entropy map size mismatch".into()));
        }
        if data.iter().any(|v| !(*v >= 0.0) || *v > attainable_max + 1e-9) {
            return Err(Error::InvalidParameter(format!(
                "entropy values must lie in [0, {attainable_max}]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
            attainable_max,
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

    pub fn attainable_max(&self) -> f64 {
        self.attainable_max
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(0.0, f64::max)
    }
}

/// The nonlinear entropy-to-strength mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Phi {
    /// 1 where the entropy exceeds `threshold`, else 0.
    Binarize { threshold: f64 },
    /// `(S / S_max)^gamma` with `S_max` the attainable maximum.
    NormalizeGamma { gamma: f64 },
}

impl Default for Phi {
    fn default() -> Self {
        Phi::Binarize {
            threshold: DEFAULT_ENTROPY_THRESHOLD,
        }
    }
}

pub fn phi(s: &EntropyMap, mapping: Phi) -> Result<StrengthMap> {
    let data = match mapping {
        Phi::Binarize { threshold } => {
            if threshold.is_nan() {
                return Err(Error::InvalidParameter("threshold is NaN".into()));
            }
            s.data
                .iter()
                .map(|&v| if v > threshold { 1.0 } else { 0.0 })
                .collect()
        }
        Phi::NormalizeGamma { gamma } => {
            if !(gamma > 0.0) || !gamma.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "gamma must be positive and finite, got {gamma}"
                )));
            }
            if s.attainable_max <= 0.0 {
                vec![0.0; s.data.len()]
            } else {
                s.data
                    .iter()
                    .map(|&v| (v / s.attainable_max).clamp(0.0, 1.0).powf(gamma))
                    .collect()
            }
        }
    };
    Ok(StrengthMap::from_raw(s.width, s.height, data))
}

/// Relative total strength: the mean of the map.
pub fn kappa(e: &StrengthMap) -> f64 {
    e.data.iter().sum::<f64>() / (e.width * e.height) as f64
}

/// Pointwise multiplication by `c ∈ [0, 1]`.
pub fn scale_brightness(e: &StrengthMap, c: f64) -> Result<StrengthMap> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!(
            "brightness factor {c} outside [0, 1]"
        )));
    }
    Ok(StrengthMap::from_raw(
        e.width,
        e.height,
        e.data.iter().map(|v| v * c).collect(),
    ))
}

/// Binarizes at `threshold`: 1 where the value is strictly greater.
pub fn binarize(e: &StrengthMap, threshold: f64) -> StrengthMap {
    StrengthMap::from_raw(
        e.width,
        e.height,
        e.data
            .iter()
            .map(|&v| if v > threshold { 1.0 } else { 0.0 })
            .collect(),
    )
}

fn check_target(target: f64, tol: f64) -> Result<()> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target relative total strength {target} outside (0, 1]"
        )));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} is negative")));
    }
    Ok(())
}

/// Brings a continuous map to `κ ≈ target` by adjusting its brightness.
///
/// Lowering κ scales the map by `target / κ(E)`. Raising it applies a
/// brightening power `E^γ` with `γ < 1`, bisected on `log γ`; the reachable
/// maximum is then the fraction of nonzero pixels.
pub fn adjust_to_kappa(e: &StrengthMap, target: f64, tol: f64) -> Result<StrengthMap> {
    check_target(target, tol)?;
    let current = kappa(e);
    let nonzero = e.data.iter().filter(|&&v| v > 0.0).count() as f64 / e.data.len() as f64;
    let unreachable = || Error::KappaUnreachable {
        target,
        min: 0.0,
        max: nonzero,
    };
    if current == 0.0 {
        return Err(unreachable());
    }
    if (current - target).abs() <= tol {
        return Ok(e.clone());
    }
    if target < current {
        return scale_brightness(e, target / current);
    }
    if target > nonzero + tol {
        return Err(unreachable());
    }

    let brighten = |log_gamma: f64| {
        let g = log_gamma.exp();
        StrengthMap::from_raw(
            e.width,
            e.height,
            e.data.iter().map(|&v| if v > 0.0 { v.powf(g) } else { 0.0 }).collect(),
        )
    };
    // κ(E^γ) decreases in γ; γ = 1 is below target.
    let (mut lo, mut hi) = (-60.0f64, 0.0f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let m = brighten(mid);
        let k = kappa(&m);
        if (k - target).abs() <= tol {
            return Ok(m);
        }
        if k > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(unreachable())
}

/// Binarizes `source` at a threshold chosen by bisection so that the
/// fraction of white pixels is within `tol` of `target`.
pub fn binarize_to_kappa(source: &StrengthMap, target: f64, tol: f64) -> Result<StrengthMap> {
    check_target(target, tol)?;
    let (min, max) = source
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    // fraction(lo) = 1, fraction(hi) = 0, nonincreasing in between
    let (mut lo, mut hi) = (min - 1.0, max);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let m = binarize(source, mid);
        let k = kappa(&m);
        if (k - target).abs() <= tol {
            return Ok(m);
        }
        if k > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::KappaGap {
        target,
        below: kappa(&binarize(source, hi)),
        above: kappa(&binarize(source, lo)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(w: usize, h: usize, data: &[f64]) -> StrengthMap {
        StrengthMap::new(w, h, data.to_vec()).unwrap()
    }

    fn entropy(data: &[f64]) -> EntropyMap {
        EntropyMap::new(data.len(), 1, data.to_vec(), 6.918863237274595).unwrap()
    }

    #[test]
    fn binarize_at_default_threshold() {
        let e = phi(&entropy(&[3.0, 5.0]), Phi::default()).unwrap();
        assert_eq!(e.data(), &[0.0, 1.0]);
    }

    #[test]
    fn binarize_at_zero_on_positive_entropy_is_all_ones() {
        let e = phi(&entropy(&[0.1, 2.0, 6.0]), Phi::Binarize { threshold: 0.0 }).unwrap();
        assert!(e.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn normalize_gamma_reaches_one_at_attainable_max() {
        let s = EntropyMap::new(2, 1, vec![1.0, 2.0], 2.0).unwrap();
        let e = phi(&s, Phi::NormalizeGamma { gamma: 1.0 }).unwrap();
        assert_eq!(e.data(), &[0.5, 1.0]);
        let e = phi(&s, Phi::NormalizeGamma { gamma: 2.0 }).unwrap();
        assert_eq!(e.data(), &[0.25, 1.0]);
        let zero = EntropyMap::new(2, 1, vec![0.0, 0.0], 2.0).unwrap();
        assert_eq!(phi(&zero, Phi::NormalizeGamma { gamma: 0.5 }).unwrap().data(), &[0.0, 0.0]);
    }

    #[test]
    fn normalize_gamma_rejects_nonpositive_gamma() {
        for gamma in [0.0, -1.0, f64::NAN] {
            assert!(phi(&entropy(&[1.0]), Phi::NormalizeGamma { gamma }).is_err());
        }
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(&StrengthMap::filled(3, 2, 1.0).unwrap()), 1.0);
        assert_eq!(kappa(&map(2, 2, &[1.0, 0.0, 0.0, 0.0])), 0.25);
    }

    #[test]
    fn scale_brightness_examples() {
        let e = map(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(kappa(&scale_brightness(&e, 0.0).unwrap()), 0.0);
        assert_eq!(scale_brightness(&e, 1.0).unwrap(), e);
        assert_eq!(kappa(&scale_brightness(&e, 0.5).unwrap()), 0.25);
        assert!(scale_brightness(&e, 1.5).is_err());
        assert!(scale_brightness(&e, -0.1).is_err());
    }

    #[test]
    fn adjust_uniform_map_down() {
        let e = StrengthMap::filled(4, 4, 0.5).unwrap();
        let out = adjust_to_kappa(&e, 0.25, DEFAULT_KAPPA_TOLERANCE).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn adjust_raises_kappa_by_brightening() {
        let e = map(4, 1, &[0.2, 0.4, 0.6, 0.0]);
        let out = adjust_to_kappa(&e, 0.6, 0.001).unwrap();
        assert!((kappa(&out) - 0.6).abs() <= 0.001);
        assert_eq!(out.data()[3], 0.0);
    }

    #[test]
    fn adjust_reports_unreachable_target() {
        let half = map(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        match adjust_to_kappa(&half, 0.9, DEFAULT_KAPPA_TOLERANCE) {
            Err(Error::KappaUnreachable { max, .. }) => assert_eq!(max, 0.5),
            other => panic!("{other:?}"),
        }
        let zero = StrengthMap::filled(2, 2, 0.0).unwrap();
        assert!(matches!(
            adjust_to_kappa(&zero, 0.1, 0.005),
            Err(Error::KappaUnreachable { .. })
        ));
        assert!(adjust_to_kappa(&half, 0.0, 0.005).is_err());
    }

    #[test]
    fn binarize_to_kappa_hits_fractions() {
        let source = StrengthMap::new(10, 10, (0..100).map(|i| i as f64 / 99.0).collect()).unwrap();
        for target in [0.05, 0.3, 0.77] {
            let b = binarize_to_kappa(&source, target, 0.005).unwrap();
            assert!(b.is_binary());
            assert!((kappa(&b) - target).abs() <= 0.005, "{target}: {}", kappa(&b));
        }
        let flat = StrengthMap::filled(3, 3, 0.5).unwrap();
        match binarize_to_kappa(&flat, 0.5, 0.005) {
            Err(Error::KappaGap { below, above, .. }) => assert_eq!((below, above), (0.0, 1.0)),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn kappa_is_linear_in_brightness(
            data in prop::collection::vec(0.0f64..=1.0, 1..64), c in 0.0f64..=1.0
        ) {
            let e = StrengthMap::new(data.len(), 1, data).unwrap();
            let scaled = scale_brightness(&e, c).unwrap();
            prop_assert!((kappa(&scaled) - c * kappa(&e)).abs() <= 1e-12);
        }

        #[test]
        fn kappa_is_monotone(pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..64)) {
            let lo: Vec<f64> = pairs.iter().map(|(a, b)| a.min(*b)).collect();
            let hi: Vec<f64> = pairs.iter().map(|(a, b)| a.max(*b)).collect();
            let n = lo.len();
            prop_assert!(kappa(&map(n, 1, &lo)) <= kappa(&map(n, 1, &hi)));
        }

        #[test]
        fn binarized_kappa_is_exceedance_fraction(
            data in prop::collection::vec(0.0f64..=6.9, 1..64), t in 0.0f64..6.9
        ) {
            let n = data.len();
            let e = phi(&entropy(&data), Phi::Binarize { threshold: t }).unwrap();
            let frac = data.iter().filter(|&&s| s > t).count() as f64 / n as f64;
            prop_assert_eq!(kappa(&e), frac);
        }
    }
}
