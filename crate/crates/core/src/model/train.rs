use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Gradients, Model};
use crate::dataset::Dataset;
use crate::image::check_shape;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            learning_rate: 0.05,
            batch_size: 16,
            seed: 0,
        }
    }
}

/// A trained model with the accuracies measured after the final epoch.
#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    /// Mean training loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Plain minibatch SGD on the cross-entropy. Deterministic given `config.seed`.
pub fn train(
    model: &Model,
    data: &Dataset,
    test: Option<&Dataset>,
    config: &TrainConfig,
) -> Result<Trained> {
    validate(model, data)?;
    if let Some(t) = test {
        validate(model, t)?;
    }
    if config.batch_size == 0 || !(config.learning_rate > 0.0) {
        return Err(Error::InvalidParameter(
            "batch size and learning rate must be positive".into(),
        ));
    }

    let mut model = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grads = Gradients::zeros_like(&model);
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.clear();
            for &i in batch {
                let sample = &data.samples()[i];
                let trace = model.trace(&sample.image);
                let pred = trace.prediction();
                total += pred.cross_entropy(sample.label);
                model.backward(&trace, &trace.logit_gradient(sample.label), Some(&mut grads));
            }
            grads.apply(&mut model, config.learning_rate / batch.len() as f64);
        }
        epoch_losses.push(total / data.len() as f64);
    }

    Ok(Trained {
        train_accuracy: accuracy(&model, data)?,
        test_accuracy: test.map(|t| accuracy(&model, t)).transpose()?,
        epoch_losses,
        model,
    })
}

pub fn accuracy(model: &Model, data: &Dataset) -> Result<f64> {
    validate(model, data)?;
    let mut correct = 0;
    for s in data.samples() {
        if model.forward(&s.image)?.label == s.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

fn validate(model: &Model, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for s in data.samples() {
        check_shape(model.input_shape(), s.image.shape())?;
        if s.label >= model.classes() {
            return Err(Error::LabelOutOfRange {
                label: s.label,
                classes: model.classes(),
            });
        }
    }
    Ok(())
}
