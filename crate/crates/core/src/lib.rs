//! Gradient-sign adversarial attacks against a small convolutional classifier,
//! localized by per-pixel strength maps.
//!
//! The crate is organized bottom-up:
//!
//! - [`image`] and [`pnm`]: dense rasters in `[0, 1]` and binary PGM/PPM I/O.
//! - [`model`]: a compact CNN with forward inference, cross-entropy loss,
//!   backpropagation to the input, SGD training and the `NNW1` weight format.
//! - [`maps`]: strength maps (local entropy, the entropy-to-strength mapping,
//!   Perlin noise, morphology, relative total strength).
//! - [`attack`]: FGSM, the basic iterative method and its localized variant,
//!   including the entropy-based iterative method (EbIM).
//! - [`stats`]: the perception-study hypothesis battery (t-tests, Wilcoxon
//!   signed-rank, Shapiro-Wilk, Cohen's d, power).
//! - [`dataset`]: a procedural ten-class image set for training the reference
//!   model, plus the class-per-directory dataset layout.
//! - [`reference`]: the fixed-seed recipe for the reference model.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod dataset;
mod error;
pub mod image;
pub mod maps;
pub mod model;
pub mod pnm;
pub mod reference;
pub mod stats;

pub use attack::{AttackConfig, AttackGoal, AttackResult, EntropyParams};
pub use error::{Error, Result};
pub use image::{GrayMap, Image, Shape};
pub use maps::{EntropyMap, StrengthMap};
pub use model::{Model, Prediction};
