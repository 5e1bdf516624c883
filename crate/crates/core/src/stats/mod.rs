//! Perception-study statistics.
//!
//! Responses are encoded as `Identical = 1`, `Different = 0` and averaged per
//! participant and condition ([`summarize`]). The five one-tailed hypotheses
//! are then tested with a t-test and a Wilcoxon signed-rank test each
//! ([`run_hypothesis_battery`]).

mod battery;
mod records;
mod shapiro;
mod synthetic;
mod ttest;
mod wilcoxon;

use serde::{Deserialize, Serialize};

pub use battery::{
    run_hypothesis_battery, Battery, BatteryCell, BatteryRow, Comparison, Hypothesis, Outcome, TestFamily,
    DEFAULT_ALPHA, HYPOTHESES,
};
pub use records::{
    read_jsonl, summarize, Choice, Condition, ParticipantSummary, Placement, TrialRecord,
};
pub use shapiro::shapiro_wilk;
pub use synthetic::{simulate_study, SyntheticStudy};
pub use ttest::{cohens_d_paired, one_sample_t_one_tailed, paired_t_one_tailed, t_power};
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_signed_rank_using, EXACT_LIMIT};

/// Direction of the alternative hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// The location is below zero (or below μ₀).
    Less,
    /// The location is above zero (or above μ₀).
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PairedT,
    OneSampleT,
    WilcoxonExact,
    WilcoxonNormal,
    ShapiroWilk,
}

/// Outcome of one test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: Method,
    /// `None` for tests without a direction (Shapiro-Wilk).
    pub tail: Option<Alternative>,
    /// t, W⁺ or W, depending on the method.
    pub statistic: f64,
    pub p_value: f64,
    /// Sample size actually used (after dropping zeros for Wilcoxon).
    pub n: usize,
    pub df: Option<f64>,
    /// Zero differences discarded by Wilcoxon.
    pub zeros_dropped: usize,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation with `n − 1` in the denominator.
fn sample_sd(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

fn differences(a: &[f64], b: &[f64]) -> crate::Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(crate::Error::InvalidParameter(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}
