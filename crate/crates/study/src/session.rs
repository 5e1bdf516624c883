use ebim::stats::{Choice, Condition, Placement};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One scheduled pair presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedTrial {
    /// Index into the study's triples.
    pub triple: usize,
    pub condition: Condition,
    pub original_side: Placement,
}

/// The randomized schedule of one session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub seed: u64,
    /// Button labels from left to right; fixed for the whole session.
    pub button_order: [Choice; 2],
    pub trials: Vec<PlannedTrial>,
}

/// Shuffles all `3 × triples` pairs, flips a coin for the side of the
/// original in every trial and one coin for the session's button order.
pub fn plan_session(triples: usize, seed: u64) -> SessionPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let button_order = if rng.random_bool(0.5) {
        [Choice::Identical, Choice::Different]
    } else {
        [Choice::Different, Choice::Identical]
    };
    let mut pairs: Vec<(usize, Condition)> = (0..triples)
        .flat_map(|t| Condition::ALL.into_iter().map(move |c| (t, c)))
        .collect();
    pairs.shuffle(&mut rng);
    let trials = pairs
        .into_iter()
        .map(|(triple, condition)| PlannedTrial {
            triple,
            condition,
            original_side: if rng.random_bool(0.5) { Placement::Left } else { Placement::Right },
        })
        .collect();
    SessionPlan {
        seed,
        button_order,
        trials,
    }
}
