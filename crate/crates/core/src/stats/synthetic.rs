use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::records::{Choice, Condition, Placement, TrialRecord};
use crate::{Error, Result};

/// Simulated participants answering "Identical" with fixed per-condition rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticStudy {
    pub participants: usize,
    /// Trials per condition and participant.
    pub trials_per_condition: usize,
    /// Probability of "Identical" for NONE, BIM and EbIM.
    pub identical_rate: [f64; 3],
    /// Each participant's rates are shifted by a uniform draw from `±spread`
    /// (clamped to `[0, 1]`).
    pub spread: f64,
    pub seed: u64,
}

impl SyntheticStudy {
    /// NONE and EbIM always "Identical", BIM always "Different".
    pub fn extreme(participants: usize, seed: u64) -> Self {
        Self {
            participants,
            trials_per_condition: 80,
            identical_rate: [1.0, 0.0, 1.0],
            spread: 0.0,
            seed,
        }
    }

    /// The qualitative ordering of the published box plot: NONE ≈ EbIM ≫ BIM.
    pub fn published_ordering(participants: usize, seed: u64) -> Self {
        Self {
            participants,
            trials_per_condition: 80,
            identical_rate: [0.96, 0.3, 0.8],
            spread: 0.1,
            seed,
        }
    }
}

/// Generates a shuffled response log for `study`.
pub fn simulate_study(study: &SyntheticStudy) -> Result<Vec<TrialRecord>> {
    if study.identical_rate.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidParameter("rates must lie in [0, 1]".into()));
    }
    if !(study.spread >= 0.0) {
        return Err(Error::InvalidParameter("spread must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(study.seed);
    let mut out = Vec::with_capacity(study.participants * study.trials_per_condition * 3);
    for p in 0..study.participants {
        let session = format!("synthetic-{p:03}");
        let rates: Vec<f64> = study
            .identical_rate
            .iter()
            .map(|&r| {
                let shift = if study.spread > 0.0 {
                    rng.random_range(-study.spread..=study.spread)
                } else {
                    0.0
                };
                (r + shift).clamp(0.0, 1.0)
            })
            .collect();
        let mut trials: Vec<(Condition, usize)> = Condition::ALL
            .iter()
            .flat_map(|&c| (0..study.trials_per_condition).map(move |k| (c, k)))
            .collect();
        trials.shuffle(&mut rng);
        for (index, (condition, pair)) in trials.into_iter().enumerate() {
            let identical = rng.random_bool(rates[condition.index()]);
            out.push(TrialRecord {
                session_id: session.clone(),
                trial_index: index,
                pair_id: format!("{}-{pair}", condition.name()),
                condition,
                original_side: if rng.random_bool(0.5) { Placement::Left } else { Placement::Right },
                choice: if identical { Choice::Identical } else { Choice::Different },
                latency_ms: rng.random_range(600..6000),
                timestamp_ms: 1_700_000_000_000 + (p * 1_000_000 + index * 4000) as u64,
            });
        }
    }
    Ok(out)
}
