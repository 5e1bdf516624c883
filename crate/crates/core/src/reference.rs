//! The desk-scale reference setup: the procedural shapes set and the
//! reference CNN trained on it with fixed seeds.

use std::path::Path;

use crate::dataset::{shapes, Dataset, SHAPE_CLASSES};
use crate::model::{load_weights, save_weights, train, Model, TrainConfig, Trained};
use crate::Result;

pub const TRAIN_PER_CLASS: usize = 200;
pub const TEST_PER_CLASS: usize = 30;
pub const TRAIN_SEED: u64 = 1;
pub const TEST_SEED: u64 = 2;
pub const INIT_SEED: u64 = 3;

pub fn train_config() -> TrainConfig {
    TrainConfig {
        epochs: 10,
        learning_rate: 0.03,
        batch_size: 16,
        seed: 4,
    }
}

/// 2000 training images, 200 per class.
pub fn train_set() -> Dataset {
    shapes(TRAIN_PER_CLASS, TRAIN_SEED)
}

/// 300 held-out images, classes interleaved.
pub fn test_set() -> Dataset {
    shapes(TEST_PER_CLASS, TEST_SEED)
}

/// Trains the reference model from scratch. Deterministic; takes about a
/// minute on one core.
pub fn train_reference() -> Result<Trained> {
    let data = train_set();
    let model = Model::reference(data.shape(), SHAPE_CLASSES, INIT_SEED)?;
    train(&model, &data, Some(&test_set()), &train_config())
}

/// Loads the reference weights from `path`, training and saving them there
/// first if the file does not exist yet.
pub fn load_or_train(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    if path.exists() {
        return load_weights(path);
    }
    let trained = train_reference()?;
    save_weights(&trained.model, path)?;
    Ok(trained.model)
}

/// The attack target used for test image `index` in the examples and
/// benchmarks: `(7·index + 3) mod classes`, moved on by one when it equals
/// the model's prediction.
pub fn attack_target(index: usize, predicted: usize, classes: usize) -> usize {
    let t = (index * 7 + 3) % classes;
    if t == predicted {
        (t + 1) % classes
    } else {
        t
    }
}
