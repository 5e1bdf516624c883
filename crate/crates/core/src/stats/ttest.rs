use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::{differences, mean, sample_sd, Alternative, Method, TestReport};
use crate::{Error, Result};

/// One-tailed paired t-test on `d = a − b`.
///
/// `Alternative::Less` tests H₁: mean(d) < 0, i.e. H₀: μ_a ≥ μ_b.
pub fn paired_t_one_tailed(a: &[f64], b: &[f64], tail: Alternative) -> Result<TestReport> {
    t_test(&differences(a, b)?, tail, Method::PairedT)
}

/// One-tailed one-sample t-test of `a` against `mu0`.
pub fn one_sample_t_one_tailed(a: &[f64], mu0: f64, tail: Alternative) -> Result<TestReport> {
    let d: Vec<f64> = a.iter().map(|v| v - mu0).collect();
    t_test(&d, tail, Method::OneSampleT)
}

fn t_test(d: &[f64], tail: Alternative, method: Method) -> Result<TestReport> {
    let n = d.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("t-test needs at least 2 values, got {n}")));
    }
    let (m, sd) = (mean(d), sample_sd(d));
    if !(sd > 1e-12 * m.abs().max(1.0)) {
        return Err(Error::Degenerate(format!(
            "differences have zero variance (all equal to {m})"
        )));
    }
    let t = m / (sd / (n as f64).sqrt());
    let df = (n - 1) as f64;
    let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
    let p = match tail {
        Alternative::Less => dist.cdf(t),
        Alternative::Greater => dist.sf(t),
    };
    Ok(TestReport {
        method,
        tail: Some(tail),
        statistic: t,
        p_value: p.clamp(0.0, 1.0),
        n,
        df: Some(df),
        zeros_dropped: 0,
    })
}

/// Cohen's d for paired samples: `mean(a − b) / sd(a − b)`.
pub fn cohens_d_paired(a: &[f64], b: &[f64]) -> Result<f64> {
    let d = differences(a, b)?;
    if d.len() < 2 {
        return Err(Error::Degenerate("Cohen's d needs at least 2 pairs".into()));
    }
    let sd = sample_sd(&d);
    if sd == 0.0 {
        return Err(Error::Degenerate("differences have zero variance".into()));
    }
    Ok(mean(&d) / sd)
}

/// Approximate power of the one-tailed t-test, `Φ(d·√n − z₁₋α)`.
///
/// This is the normal approximation to the noncentral t distribution; it
/// slightly overstates power for small `n`.
pub fn t_power(effect: f64, n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 1)")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("power needs n ≥ 2, got {n}")));
    }
    let z = Normal::standard();
    Ok(z.cdf(effect * (n as f64).sqrt() - z.inverse_cdf(1.0 - alpha)))
}
