//! Scenario configuration.
//!
//! A config file is TOML with one table per scenario:
//!
//! ```toml
//! [bm_beta8]
//! model = "brownian"
//! score = "new"
//! n_rep = 100
//! samples = 1000
//! seed = 1
//! params = { beta = 8.0, dt = 1e-3 }
//! ```
//!
//! `params` is passed to the model catalog, so grid settings (`T`, `dt`,
//! `x0`) and the threshold `a` live there alongside the physical parameters.

use crate::error::{ExpError, Result};
use ams_core::sde::catalog::MODEL_NAMES;
use ams_core::sde::Params;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

pub const SCORE_NAMES: &[&str] = &["std", "new", "new_schedule", "committor"];

fn default_score() -> String {
    "new".into()
}

fn default_n_rep() -> usize {
    100
}

fn default_samples() -> usize {
    100
}

fn default_threads() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default = "default_score")]
    pub score: String,
    /// Threshold profile for `new_schedule`; only `linear` (`a t / T`) is built in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    #[serde(default = "default_n_rep")]
    pub n_rep: usize,
    /// Number of independent AMS realizations `M`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            params: Params::new(),
            score: default_score(),
            schedule: None,
            n_rep: default_n_rep(),
            samples: default_samples(),
            seed: 0,
            threads: default_threads(),
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !MODEL_NAMES.contains(&self.model.as_str()) {
            return Err(ExpError::Config(format!(
                "unknown model `{}` (known: {})",
                self.model,
                MODEL_NAMES.join(", ")
            )));
        }
        if !SCORE_NAMES.contains(&self.score.as_str()) {
            return Err(ExpError::Config(format!(
                "unknown score `{}` (known: {})",
                self.score,
                SCORE_NAMES.join(", ")
            )));
        }
        if self.n_rep < 2 {
            return Err(ExpError::Config("n_rep must be at least 2".into()));
        }
        if self.samples == 0 {
            return Err(ExpError::Config("samples must be positive".into()));
        }
        if let Some((k, v)) = self.params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ExpError::Config(format!("parameter {k} = {v} is not finite")));
        }
        Ok(())
    }

    /// Hex prefix of the SHA-256 of everything that determines the results.
    ///
    /// `threads` is left out: results do not depend on it.
    pub fn hash(&self) -> String {
        let canonical = Self {
            threads: 0,
            ..self.clone()
        };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, ExperimentConfig>> {
    let scenarios: BTreeMap<String, ExperimentConfig> =
        toml::from_str(text).map_err(|e| ExpError::Config(e.to_string()))?;
    if scenarios.is_empty() {
        return Err(ExpError::Config("no scenarios defined".into()));
    }
    for (name, cfg) in &scenarios {
        cfg.validate()
            .map_err(|e| ExpError::Config(format!("[{name}] {e}")))?;
    }
    Ok(scenarios)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, ExperimentConfig>> {
    let text = std::fs::read_to_string(path).map_err(|source| ExpError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
