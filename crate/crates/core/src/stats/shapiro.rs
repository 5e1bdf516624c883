//! Shapiro-Wilk W test, following Royston's Algorithm AS R94 (complete
//! samples only).

use std::f64::consts::PI;

use statrs::distribution::{ContinuousCDF, Normal};

use super::{Method, TestReport};
use crate::{Error, Result};

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

/// Reported when `ln(1 − W)` falls beyond the small-sample approximation.
const TINY_P: f64 = 1e-19;

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Shapiro-Wilk test for normality; `statistic` is W.
pub fn shapiro_wilk(x: &[f64]) -> Result<TestReport> {
    let n = x.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "Shapiro-Wilk needs 3 to 5000 values, got {n}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("values must be finite".into()));
    }
    let mut x = x.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < 1e-19 {
        return Err(Error::Degenerate("sample has zero range".into()));
    }

    let a = coefficients(n);
    let half = n / 2;
    let xs: Vec<f64> = x.iter().map(|v| v / range).collect();
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    // full antisymmetric coefficient vector: −a on the lower half, +a on the upper
    let full = |i: usize| {
        if i < half {
            -a[i]
        } else if n % 2 == 1 && i == half {
            0.0
        } else {
            a[n - 1 - i]
        }
    };
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, &xi) in xs.iter().enumerate() {
        let (ai, dx) = (full(i), xi - mean_x);
        ssa += ai * ai;
        ssx += dx * dx;
        sax += ai * dx;
    }
    let root = (ssa * ssx).sqrt();
    let w1 = (root - sax) * (root + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    Ok(TestReport {
        method: Method::ShapiroWilk,
        tail: None,
        statistic: w,
        p_value: p_value(n, w, w1).clamp(0.0, 1.0),
        n,
        df: None,
        zeros_dropped: 0,
    })
}

/// The upper half of the antisymmetric coefficients, largest first.
fn coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let z = Normal::standard();
    let an = n as f64;
    let m: Vec<f64> = (0..half)
        .map(|i| z.inverse_cdf((i as f64 + 1.0 - 0.375) / (an + 0.25)))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;

    let mut a = vec![0.0; half];
    a[0] = a1;
    let (first, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        a[1] = a2;
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    for i in first..half {
        a[i] = -m[i] / fac;
    }
    a
}

fn p_value(n: usize, w: f64, w1: f64) -> f64 {
    if n == 3 {
        return 1.0 - 6.0 / PI * w.max(0.75).sqrt().acos();
    }
    let z = Normal::standard();
    let y = w1.ln();
    let an = n as f64;
    if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return TINY_P;
        }
        let y = -(gamma - y).ln();
        let m = poly(&C3, an);
        let s = poly(&C4, an).exp();
        return z.sf((y - m) / s);
    }
    let ln_n = an.ln();
    let m = poly(&C5, ln_n);
    let s = poly(&C6, ln_n).exp();
    z.sf((y - m) / s)
}
