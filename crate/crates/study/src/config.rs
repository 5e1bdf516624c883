use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Result, StudyError};

pub const DEFAULT_DISPLAY_MS: u64 = 5000;

/// An original image with its two adversarial versions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageTriple {
    pub id: String,
    pub original: PathBuf,
    pub bim: PathBuf,
    pub ebim: PathBuf,
}

/// Study definition, usually loaded from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub triples: Vec<ImageTriple>,
    #[serde(default = "default_display_ms")]
    pub display_duration_ms: u64,
    /// Base seed for sessions created without an explicit seed. Session `k`
    /// then uses `seed + k`; without a base seed, sessions are seeded from
    /// the operating system.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_display_ms() -> u64 {
    DEFAULT_DISPLAY_MS
}

impl StudyConfig {
    pub fn new(triples: Vec<ImageTriple>) -> Self {
        Self {
            triples,
            display_duration_ms: DEFAULT_DISPLAY_MS,
            seed: None,
        }
    }

    /// Reads a JSON config; relative image paths are resolved against the
    /// config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut config: StudyConfig = serde_json::from_str(&text)
            .map_err(|e| StudyError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for t in &mut config.triples {
            for p in [&mut t.original, &mut t.bim, &mut t.ebim] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Checks that there is at least one triple, ids are unique and every
    /// image file exists.
    pub fn validate(&self) -> Result<()> {
        if self.triples.is_empty() {
            return Err(StudyError::InvalidConfig("no image triples".into()));
        }
        let mut ids = HashSet::new();
        for t in &self.triples {
            if t.id.is_empty() {
                return Err(StudyError::InvalidConfig("empty triple id".into()));
            }
            if !ids.insert(&t.id) {
                return Err(StudyError::InvalidConfig(format!("duplicate triple id {}", t.id)));
            }
            for p in [&t.original, &t.bim, &t.ebim] {
                if !p.is_file() {
                    return Err(StudyError::InvalidConfig(format!(
                        "triple {}: missing image {}",
                        t.id,
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Trials per session: three conditions per triple.
    pub fn trial_count(&self) -> usize {
        3 * self.triples.len()
    }
}
