//! Gradient-sign attacks.
//!
//! All iterative attacks share one loop. Each iteration evaluates the model
//! once, stops if the goal is met, and otherwise moves every value by
//! `stepsize · E(pixel) · sign(∇ₓJ)`:
//!
//! - targeted attacks descend on `J(x, target)`,
//! - untargeted attacks ascend on `J(x, original label)`.
//!
//! After every step the image is clipped to `[0, 1]` and to the ℓ∞ ball of
//! radius `linf_budget` around the original. `sign(0) = 0`, and pixels where
//! the strength map is 0 are never written, so they stay bit-identical.
//!
//! [`bim`] is the localized loop with an all-ones map, and [`ebim`] derives
//! the map from the local entropy of the input.

use serde::{Deserialize, Serialize};

use crate::image::{check_shape, norms, GrayscaleMode, Image, Norms};
use crate::maps::{self, Phi, StrengthMap};
use crate::model::{Model, Prediction};
use crate::{Error, Result};

pub const DEFAULT_CERTAINTY: f64 = 0.99;
pub const DEFAULT_STEPSIZE: f64 = 0.004;
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
pub const DEFAULT_LINF_BUDGET: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AttackGoal {
    /// Reach `label` with at least the configured certainty.
    Targeted { label: usize },
    /// Move the prediction off the original label.
    Untargeted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub goal: AttackGoal,
    /// Target certainty τ; ignored by untargeted attacks.
    pub certainty_threshold: f64,
    /// Per-iteration step ε.
    pub stepsize: f64,
    pub max_iterations: usize,
    /// Cap on the total change of any single value.
    pub linf_budget: f64,
}

impl AttackConfig {
    pub fn targeted(label: usize) -> Self {
        Self {
            goal: AttackGoal::Targeted { label },
            certainty_threshold: DEFAULT_CERTAINTY,
            stepsize: DEFAULT_STEPSIZE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            linf_budget: DEFAULT_LINF_BUDGET,
        }
    }

    pub fn untargeted() -> Self {
        Self {
            goal: AttackGoal::Untargeted,
            ..Self::targeted(0)
        }
    }

    pub fn validate(&self, classes: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.certainty_threshold > 0.0 && self.certainty_threshold < 1.0) {
            return bad(format!(
                "certainty threshold {} outside (0, 1)",
                self.certainty_threshold
            ));
        }
        if !(self.stepsize > 0.0) || !self.stepsize.is_finite() {
            return bad(format!("stepsize {} must be positive", self.stepsize));
        }
        if self.max_iterations < 1 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.linf_budget > 0.0 && self.linf_budget <= 1.0) {
            return bad(format!("linf budget {} outside (0, 1]", self.linf_budget));
        }
        if let AttackGoal::Targeted { label } = self.goal {
            if label >= classes {
                return Err(Error::LabelOutOfRange { label, classes });
            }
        }
        Ok(())
    }
}

/// How [`ebim`] derives its strength map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyParams {
    pub radius: usize,
    pub bins: usize,
    pub phi: Phi,
    pub grayscale: GrayscaleMode,
}

impl Default for EntropyParams {
    fn default() -> Self {
        Self {
            radius: maps::DEFAULT_RADIUS,
            bins: maps::DEFAULT_BINS,
            phi: Phi::default(),
            grayscale: GrayscaleMode::Mean,
        }
    }
}

impl EntropyParams {
    pub fn strength_map(&self, x: &Image) -> Result<StrengthMap> {
        let s = maps::local_entropy(&x.to_grayscale_with(self.grayscale), self.radius, self.bins)?;
        maps::phi(&s, self.phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fgsm,
    Bim,
    Localized,
    Ebim,
}

#[derive(Debug, Clone)]
pub struct AttackResult {
    pub method: Method,
    pub goal: AttackGoal,
    pub adversarial: Image,
    pub iterations_used: usize,
    pub original_prediction: Prediction,
    pub final_prediction: Prediction,
    pub success: bool,
    pub norms: Norms,
    pub strength_map: StrengthMap,
}

impl AttackResult {
    pub fn report(&self) -> AttackReport {
        AttackReport {
            method: self.method,
            goal: self.goal,
            success: self.success,
            iterations_used: self.iterations_used,
            original_label: self.original_prediction.label,
            original_certainty: self.original_prediction.certainty,
            final_label: self.final_prediction.label,
            final_certainty: self.final_prediction.certainty,
            target_probability: match self.goal {
                AttackGoal::Targeted { label } => Some(self.final_prediction.probability(label)),
                AttackGoal::Untargeted => None,
            },
            kappa: self.strength_map.kappa(),
            norms: self.norms,
        }
    }
}

/// Serializable summary of an [`AttackResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub method: Method,
    pub goal: AttackGoal,
    pub success: bool,
    pub iterations_used: usize,
    pub original_label: usize,
    pub original_certainty: f64,
    pub final_label: usize,
    pub final_certainty: f64,
    pub target_probability: Option<f64>,
    pub kappa: f64,
    pub norms: Norms,
}

fn goal_met(goal: AttackGoal, tau: f64, original: usize, p: &Prediction) -> bool {
    match goal {
        AttackGoal::Targeted { label } => p.label == label && p.probability(label) >= tau,
        AttackGoal::Untargeted => p.label != original,
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Single untargeted step `x' = clip(x + ε·sign(∇ₓJ(x, f(x))))`.
pub fn fgsm(m: &Model, x: &Image, epsilon: f64) -> Result<AttackResult> {
    check_shape(m.input_shape(), x.shape())?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let trace = m.trace(x);
    let original = trace.prediction();
    let grad = m.input_gradient_from_trace(&trace, original.label);
    let data = x
        .data()
        .iter()
        .zip(&grad)
        .map(|(&v, &g)| (v + epsilon * sign(g)).clamp(0.0, 1.0))
        .collect();
    let adversarial = Image::from_raw(x.shape(), data);
    let final_prediction = m.forward(&adversarial)?;
    Ok(AttackResult {
        method: Method::Fgsm,
        goal: AttackGoal::Untargeted,
        success: final_prediction.label != original.label,
        norms: norms(x, &adversarial)?,
        adversarial,
        iterations_used: 1,
        original_prediction: original,
        final_prediction,
        strength_map: StrengthMap::filled(x.width(), x.height(), 1.0)?,
    })
}

/// Basic iterative method: the localized loop with a uniform map.
pub fn bim(m: &Model, x: &Image, cfg: &AttackConfig) -> Result<AttackResult> {
    let ones = StrengthMap::filled(x.width(), x.height(), 1.0)?;
    run(m, x, cfg, ones, Method::Bim)
}

/// Iterative attack with per-pixel step `stepsize · E(pixel)`, broadcast over channels.
pub fn localized_bim(
    m: &Model,
    x: &Image,
    cfg: &AttackConfig,
    map: &StrengthMap,
) -> Result<AttackResult> {
    if map.kappa() == 0.0 {
        return Err(Error::ZeroStrengthMap);
    }
    run(m, x, cfg, map.clone(), Method::Localized)
}

/// Entropy-based iterative method: the localized loop with `E = φ(S(gray(x)))`.
pub fn ebim(
    m: &Model,
    x: &Image,
    cfg: &AttackConfig,
    params: &EntropyParams,
) -> Result<AttackResult> {
    check_shape(m.input_shape(), x.shape())?;
    let gray = x.to_grayscale_with(params.grayscale);
    let s = maps::local_entropy(&gray, params.radius, params.bins)?;
    let e = maps::phi(&s, params.phi)?;
    if e.kappa() == 0.0 {
        let threshold = match params.phi {
            Phi::Binarize { threshold } => threshold,
            Phi::NormalizeGamma { .. } => 0.0,
        };
        return Err(Error::EmptyEntropyMask {
            threshold,
            max_entropy: s.max(),
        });
    }
    run(m, x, cfg, e, Method::Ebim)
}

fn run(
    m: &Model,
    x: &Image,
    cfg: &AttackConfig,
    map: StrengthMap,
    method: Method,
) -> Result<AttackResult> {
    check_shape(m.input_shape(), x.shape())?;
    cfg.validate(m.classes())?;
    if map.width() != x.width() || map.height() != x.height() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{} strength map", x.width(), x.height()),
            actual: format!("{}x{}", map.width(), map.height()),
        });
    }

    let channels = x.channels();
    let (label, direction) = match cfg.goal {
        AttackGoal::Targeted { label } => (label, -1.0),
        AttackGoal::Untargeted => (usize::MAX, 1.0),
    };
    let lower: Vec<f64> = x.data().iter().map(|v| (v - cfg.linf_budget).max(0.0)).collect();
    let upper: Vec<f64> = x.data().iter().map(|v| (v + cfg.linf_budget).min(1.0)).collect();

    let mut current = x.clone();
    let mut trace = m.trace(&current);
    let original = trace.prediction();
    let loss_label = if label == usize::MAX { original.label } else { label };
    let mut prediction = original.clone();
    let mut iterations = 0;

    while !goal_met(cfg.goal, cfg.certainty_threshold, original.label, &prediction)
        && iterations < cfg.max_iterations
    {
        let grad = m.input_gradient_from_trace(&trace, loss_label);
        let mut data = current.into_data();
        for (p, &strength) in map.data().iter().enumerate() {
            if strength == 0.0 {
                continue;
            }
            let step = cfg.stepsize * strength;
            for i in p * channels..(p + 1) * channels {
                let s = sign(grad[i]);
                if s != 0.0 {
                    data[i] = (data[i] + direction * step * s).clamp(lower[i], upper[i]);
                }
            }
        }
        current = Image::from_raw(x.shape(), data);
        trace = m.trace(&current);
        prediction = trace.prediction();
        iterations += 1;
    }

    Ok(AttackResult {
        method,
        goal: cfg.goal,
        success: goal_met(cfg.goal, cfg.certainty_threshold, original.label, &prediction),
        norms: norms(x, &current)?,
        adversarial: current,
        iterations_used: iterations,
        original_prediction: original,
        final_prediction: prediction,
        strength_map: map,
    })
}
