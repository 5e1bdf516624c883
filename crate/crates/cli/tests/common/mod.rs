//! The trained reference model, shared by the integration tests and cached
//! under the cargo target directory so it is trained at most once.

#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use ebim::model::{load_weights, save_weights};
use ebim::{reference, Model};
use serde::{Deserialize, Serialize};

/// Facts recorded when the cached model was trained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub seconds: f64,
}

pub struct Reference {
    pub model: Model,
    pub weights: PathBuf,
    pub record: TrainingRecord,
    /// Whether this process trained the model (rather than loading the cache).
    pub trained_here: bool,
}

pub fn reference_model() -> &'static Reference {
    static CELL: OnceLock<Reference> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
        let weights = dir.join("reference-v1.nnw");
        let record_path = dir.join("reference-v1.json");
        if let (Ok(model), Ok(text)) = (load_weights(&weights), std::fs::read_to_string(&record_path)) {
            if let Ok(record) = serde_json::from_str(&text) {
                return Reference {
                    model,
                    weights,
                    record,
                    trained_here: false,
                };
            }
        }
        let start = Instant::now();
        let trained = reference::train_reference().expect("reference training");
        let record = TrainingRecord {
            train_accuracy: trained.train_accuracy,
            test_accuracy: trained.test_accuracy.expect("test set given"),
            seconds: start.elapsed().as_secs_f64(),
        };
        let pid = std::process::id();
        let tmp_w = dir.join(format!("reference-v1.nnw.{pid}"));
        let tmp_r = dir.join(format!("reference-v1.json.{pid}"));
        save_weights(&trained.model, &tmp_w).unwrap();
        std::fs::write(&tmp_r, serde_json::to_string(&record).unwrap()).unwrap();
        std::fs::rename(&tmp_w, &weights).unwrap();
        std::fs::rename(&tmp_r, &record_path).unwrap();
        Reference {
            model: trained.model,
            weights,
            record,
            trained_here: true,
        }
    })
}

pub fn target_for(i: usize, predicted: usize, classes: usize) -> usize {
    reference::attack_target(i, predicted, classes)
}
