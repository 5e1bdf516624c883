use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::records::{Condition, ParticipantSummary};
use super::{
    cohens_d_paired, differences, one_sample_t_one_tailed, paired_t_one_tailed, shapiro_wilk,
    t_power, wilcoxon_signed_rank, Alternative, TestReport,
};
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// What a hypothesis compares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Comparison {
    /// Paired on `a − b`.
    Paired { a: Condition, b: Condition },
    /// One sample against a fixed mean.
    OneSample { a: Condition, mu0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hypothesis {
    pub id: u8,
    /// The null hypothesis, for display.
    pub null: &'static str,
    pub comparison: Comparison,
    /// Direction of the alternative that rejecting the null supports.
    pub tail: Alternative,
}

/// The five null hypotheses of the perception study.
pub const HYPOTHESES: [Hypothesis; 5] = [
    Hypothesis {
        id: 1,
        null: "mu_BIM >= mu_EbIM",
        comparison: Comparison::Paired { a: Condition::Bim, b: Condition::Ebim },
        tail: Alternative::Less,
    },
    Hypothesis {
        id: 2,
        null: "mu_BIM >= 0.5",
        comparison: Comparison::OneSample { a: Condition::Bim, mu0: 0.5 },
        tail: Alternative::Less,
    },
    Hypothesis {
        id: 3,
        null: "mu_EbIM <= 0.5",
        comparison: Comparison::OneSample { a: Condition::Ebim, mu0: 0.5 },
        tail: Alternative::Greater,
    },
    Hypothesis {
        id: 4,
        null: "mu_BIM >= mu_NONE",
        comparison: Comparison::Paired { a: Condition::Bim, b: Condition::None },
        tail: Alternative::Less,
    },
    Hypothesis {
        id: 5,
        null: "mu_EbIM >= mu_NONE",
        comparison: Comparison::Paired { a: Condition::Ebim, b: Condition::None },
        tail: Alternative::Less,
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFamily {
    TTest,
    Wilcoxon,
}

impl fmt::Display for TestFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestFamily::TTest => "t-test",
            TestFamily::Wilcoxon => "Wilcoxon",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Tested(TestReport),
    /// The test is undefined on this data (e.g. zero variance).
    Degenerate { reason: String },
}

impl Outcome {
    fn from_result(r: Result<TestReport>) -> Result<Self> {
        match r {
            Ok(report) => Ok(Outcome::Tested(report)),
            Err(Error::Degenerate(reason)) => Ok(Outcome::Degenerate { reason }),
            Err(e) => Err(e),
        }
    }

    pub fn report(&self) -> Option<&TestReport> {
        match self {
            Outcome::Tested(r) => Some(r),
            Outcome::Degenerate { .. } => None,
        }
    }

    pub fn p_value(&self) -> Option<f64> {
        self.report().map(|r| r.p_value)
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Outcome::Degenerate { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryCell {
    pub hypothesis: u8,
    pub family: TestFamily,
    pub outcome: Outcome,
    /// `p < α`; `None` when degenerate.
    pub rejected: Option<bool>,
}

/// Flat row of the machine-readable report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryRow {
    pub hypothesis: u8,
    pub method: String,
    pub statistic: Option<f64>,
    pub p: Option<f64>,
    pub n: Option<usize>,
    pub rejected: Option<bool>,
    pub degenerate: Option<String>,
}

/// The full test grid plus normality check, effect size and power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub alpha: f64,
    /// Complete participants entering the tests.
    pub participants: usize,
    /// Participants excluded because a condition had no responses.
    pub incomplete: Vec<String>,
    /// Ten cells: the t-tests for hypotheses 1 to 5, then the Wilcoxon tests.
    pub cells: Vec<BatteryCell>,
    /// Shapiro-Wilk on the per-participant `μ_EbIM − μ_BIM`.
    pub normality: Outcome,
    /// Cohen's d of `μ_EbIM − μ_BIM`.
    pub cohens_d: Option<f64>,
    /// Approximate one-tailed t-test power at the observed `cohens_d`.
    pub power: Option<f64>,
}

impl Battery {
    pub fn cell(&self, family: TestFamily, hypothesis: u8) -> &BatteryCell {
        self.cells
            .iter()
            .find(|c| c.family == family && c.hypothesis == hypothesis)
            .expect("battery holds every family/hypothesis pair")
    }

    pub fn rows(&self) -> Vec<BatteryRow> {
        self.cells
            .iter()
            .map(|c| {
                let r = c.outcome.report();
                BatteryRow {
                    hypothesis: c.hypothesis,
                    method: c.family.to_string(),
                    statistic: r.map(|r| r.statistic),
                    p: r.map(|r| r.p_value),
                    n: r.map(|r| r.n),
                    rejected: c.rejected,
                    degenerate: match &c.outcome {
                        Outcome::Degenerate { reason } => Some(reason.clone()),
                        Outcome::Tested(_) => None,
                    },
                }
            })
            .collect()
    }

    /// Plain-text table: one row per test, one column per hypothesis.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<10}", "Test");
        for h in &HYPOTHESES {
            let _ = write!(s, "{:>12}", format!("Hyp. {}", h.id));
        }
        s.push('\n');
        for family in [TestFamily::TTest, TestFamily::Wilcoxon] {
            let _ = write!(s, "{:<10}", family.to_string());
            for h in &HYPOTHESES {
                let cell = match self.cell(family, h.id).outcome.p_value() {
                    Some(p) => format!("{p:.3e}"),
                    None => "degenerate".into(),
                };
                let _ = write!(s, "{cell:>12}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "alpha = {}, participants = {}", self.alpha, self.participants);
        for h in &HYPOTHESES {
            let _ = writeln!(s, "  ({}) H0: {}", h.id, h.null);
        }
        match &self.normality {
            Outcome::Tested(r) => {
                let _ = writeln!(s, "Shapiro-Wilk W = {:.4}, p = {:.4}", r.statistic, r.p_value);
            }
            Outcome::Degenerate { reason } => {
                let _ = writeln!(s, "Shapiro-Wilk: {reason}");
            }
        }
        if let (Some(d), Some(p)) = (self.cohens_d, self.power) {
            let _ = writeln!(s, "Cohen's d = {d:.3}, power = {p:.6}");
        }
        s
    }
}

fn column(summaries: &[&ParticipantSummary], c: Condition) -> Vec<f64> {
    summaries.iter().map(|s| s.mean(c).expect("complete participant")).collect()
}

/// Runs both tests for all five hypotheses over the complete participants.
///
/// Fails if fewer than two participants are complete. Zero-variance samples
/// do not fail the battery; the affected cells are marked degenerate.
pub fn run_hypothesis_battery(summaries: &[ParticipantSummary], alpha: f64) -> Result<Battery> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 1)")));
    }
    let complete: Vec<&ParticipantSummary> = summaries.iter().filter(|s| s.is_complete()).collect();
    if complete.len() < 2 {
        return Err(Error::Degenerate(format!(
            "the battery needs at least 2 complete participants, got {}",
            complete.len()
        )));
    }
    let incomplete = summaries
        .iter()
        .filter(|s| !s.is_complete())
        .map(|s| s.participant.clone())
        .collect();

    let mut cells = Vec::with_capacity(10);
    for family in [TestFamily::TTest, TestFamily::Wilcoxon] {
        for h in &HYPOTHESES {
            let result = match (family, h.comparison) {
                (TestFamily::TTest, Comparison::Paired { a, b }) => {
                    paired_t_one_tailed(&column(&complete, a), &column(&complete, b), h.tail)
                }
                (TestFamily::TTest, Comparison::OneSample { a, mu0 }) => {
                    one_sample_t_one_tailed(&column(&complete, a), mu0, h.tail)
                }
                (TestFamily::Wilcoxon, Comparison::Paired { a, b }) => wilcoxon_signed_rank(
                    &differences(&column(&complete, a), &column(&complete, b))?,
                    h.tail,
                ),
                (TestFamily::Wilcoxon, Comparison::OneSample { a, mu0 }) => {
                    let d: Vec<f64> = column(&complete, a).iter().map(|v| v - mu0).collect();
                    wilcoxon_signed_rank(&d, h.tail)
                }
            };
            let outcome = Outcome::from_result(result)?;
            cells.push(BatteryCell {
                hypothesis: h.id,
                family,
                rejected: outcome.p_value().map(|p| p < alpha),
                outcome,
            });
        }
    }

    let ebim = column(&complete, Condition::Ebim);
    let bim = column(&complete, Condition::Bim);
    let gap = differences(&ebim, &bim)?;
    let normality = if gap.len() < 3 {
        Outcome::Degenerate {
            reason: format!("Shapiro-Wilk needs 3 participants, got {}", gap.len()),
        }
    } else {
        Outcome::from_result(shapiro_wilk(&gap))?
    };
    let cohens_d = cohens_d_paired(&ebim, &bim).ok();
    let power = match cohens_d {
        Some(d) => Some(t_power(d, complete.len(), alpha)?),
        None => None,
    };

    Ok(Battery {
        alpha,
        participants: complete.len(),
        incomplete,
        cells,
        normality,
        cohens_d,
        power,
    })
}
