use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// What the participant was shown next to the original.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// (i) the original twice.
    #[serde(rename = "i")]
    None,
    /// (ii) the BIM adversarial.
    #[serde(rename = "ii")]
    Bim,
    /// (iii) the EbIM adversarial.
    #[serde(rename = "iii")]
    Ebim,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::None, Condition::Bim, Condition::Ebim];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Condition::None => "NONE",
            Condition::Bim => "BIM",
            Condition::Ebim => "EbIM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    Identical,
    Different,
}

impl Choice {
    pub fn score(self) -> f64 {
        match self {
            Choice::Identical => 1.0,
            Choice::Different => 0.0,
        }
    }
}

/// Side on which the original image was shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Left,
    Right,
}

/// One study response, as stored one-per-line in the response log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub session_id: String,
    pub trial_index: usize,
    pub pair_id: String,
    pub condition: Condition,
    pub original_side: Placement,
    pub choice: Choice,
    pub latency_ms: u64,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
}

/// Per-participant fraction of "Identical" answers in each condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantSummary {
    pub participant: String,
    /// Indexed by [`Condition::index`]; `None` when the condition has no trials.
    pub means: [Option<f64>; 3],
    pub counts: [usize; 3],
}

impl ParticipantSummary {
    pub fn mean(&self, c: Condition) -> Option<f64> {
        self.means[c.index()]
    }

    pub fn count(&self, c: Condition) -> usize {
        self.counts[c.index()]
    }

    /// Every condition has at least one response.
    pub fn is_complete(&self) -> bool {
        self.means.iter().all(Option::is_some)
    }
}

/// Per-participant means, sorted by participant id.
///
/// Participants with a condition lacking responses keep `None` for that mean
/// and report `is_complete() == false`.
pub fn summarize(records: &[TrialRecord]) -> Result<Vec<ParticipantSummary>> {
    let mut seen = BTreeSet::new();
    let mut acc: BTreeMap<&str, ([f64; 3], [usize; 3])> = BTreeMap::new();
    for r in records {
        if !seen.insert((r.session_id.as_str(), r.trial_index)) {
            return Err(Error::DuplicateRecord {
                session: r.session_id.clone(),
                trial: r.trial_index,
            });
        }
        let (sums, counts) = acc.entry(&r.session_id).or_default();
        sums[r.condition.index()] += r.choice.score();
        counts[r.condition.index()] += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(id, (sums, counts))| ParticipantSummary {
            participant: id.to_string(),
            means: std::array::from_fn(|c| (counts[c] > 0).then(|| sums[c] / counts[c] as f64)),
            counts,
        })
        .collect())
}

/// Parses a JSONL response log; blank lines are skipped.
pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            Error::InvalidParameter(format!("response log line {}: {e}", i + 1))
        })?;
        out.push(record);
    }
    Ok(out)
}
