use statrs::distribution::{ContinuousCDF, Normal};

use super::{Alternative, Method, TestReport};
use crate::{Error, Result};

/// Largest sample (after dropping zeros) that gets the exact null distribution.
pub const EXACT_LIMIT: usize = 20;

/// Differences with `|d|` below this are treated as zero and dropped.
const ZERO: f64 = 1e-12;

/// One-tailed Wilcoxon signed-rank test of the differences `d`.
///
/// The statistic is W⁺, the sum of the (mid)ranks of `|d|` over positive
/// differences. Zero differences are dropped and counted in
/// `zeros_dropped`. Up to [`EXACT_LIMIT`] remaining values the p-value comes
/// from the exact permutation distribution of W⁺ given the observed ranks;
/// above it from the normal approximation with tie-corrected variance and a
/// continuity correction of ½.
pub fn wilcoxon_signed_rank(d: &[f64], tail: Alternative) -> Result<TestReport> {
    let exact = d.iter().filter(|v| v.abs() >= ZERO).count() <= EXACT_LIMIT;
    wilcoxon_signed_rank_using(d, tail, exact)
}

/// [`wilcoxon_signed_rank`] with the exact or normal method chosen explicitly.
pub fn wilcoxon_signed_rank_using(d: &[f64], tail: Alternative, exact: bool) -> Result<TestReport> {
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("differences must be finite".into()));
    }
    let kept: Vec<f64> = d.iter().copied().filter(|v| v.abs() >= ZERO).collect();
    let zeros_dropped = d.len() - kept.len();
    if kept.is_empty() {
        return Err(Error::Degenerate(format!(
            "all {} differences are zero",
            d.len()
        )));
    }
    if exact && kept.len() > 63 {
        return Err(Error::InvalidParameter(format!(
            "exact enumeration is limited to 63 values, got {}",
            kept.len()
        )));
    }

    let (ranks2, tie_sizes) = doubled_midranks(&kept);
    let w2: u64 = kept
        .iter()
        .zip(&ranks2)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let n = kept.len();
    let p = if exact {
        exact_p(&ranks2, w2, tail)
    } else {
        normal_p(n, &tie_sizes, w2 as f64 / 2.0, tail)
    };
    Ok(TestReport {
        method: if exact { Method::WilcoxonExact } else { Method::WilcoxonNormal },
        tail: Some(tail),
        statistic: w2 as f64 / 2.0,
        p_value: p.clamp(0.0, 1.0),
        n,
        df: None,
        zeros_dropped,
    })
}

/// Twice the midranks of `|v|` (always integers), in input order, plus the
/// sizes of all tie groups.
fn doubled_midranks(v: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()));
    let mut ranks = vec![0; v.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let first = v[order[start]].abs();
        let mut end = start;
        while end + 1 < order.len() && v[order[end + 1]].abs() - first <= ZERO * first.max(1.0) {
            end += 1;
        }
        // positions start..=end hold ranks start+1..=end+1
        let r2 = (start + end + 2) as u64;
        for &i in &order[start..=end] {
            ranks[i] = r2;
        }
        ties.push(end - start + 1);
        start = end + 1;
    }
    (ranks, ties)
}

/// Exact tail probability of W⁺ under random signs, by dynamic programming
/// over sums of doubled ranks.
fn exact_p(ranks2: &[u64], observed2: u64, tail: Alternative) -> f64 {
    let total: u64 = ranks2.iter().sum();
    let mut counts = vec![0.0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in ranks2 {
        let r = r as usize;
        for s in (r..=reach + r).rev() {
            counts[s] += counts[s - r];
        }
        reach += r;
    }
    let all = 2f64.powi(ranks2.len() as i32);
    let tail_count: f64 = match tail {
        Alternative::Less => counts[..=observed2 as usize].iter().sum(),
        Alternative::Greater => counts[observed2 as usize..].iter().sum(),
    };
    tail_count / all
}

fn normal_p(n: usize, ties: &[usize], w: f64, tail: Alternative) -> f64 {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    let z = Normal::standard();
    if var <= 0.0 {
        return 1.0;
    }
    let sd = var.sqrt();
    match tail {
        Alternative::Less => z.cdf((w - mean + 0.5) / sd),
        Alternative::Greater => z.sf((w - mean - 0.5) / sd),
    }
}
