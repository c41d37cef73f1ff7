//! Experiment configuration file (TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::NoiseRegistry;
use crate::decoder_rl::TrainConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed for evaluation. Training uses `train.seed`.
    pub seed: Option<u64>,
    pub noise: String,
    pub p_list: Vec<f64>,
    pub trials: u64,
    pub decoders: Vec<String>,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: None,
            noise: "xz3".into(),
            p_list: vec![0.005, 0.01, 0.02, 0.05],
            trials: 100_000,
            decoders: vec!["greedy".into(), "rl-on-greedy".into()],
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        toml::from_str(&text).map_err(|e| Error::format(path, e))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self, noise: &NoiseRegistry) -> Result<()> {
        if !noise.names().contains(&self.noise.as_str()) {
            return Err(Error::validation(format!(
                "unknown noise model '{}' (known: {})",
                self.noise,
                noise.names().join(", ")
            )));
        }
        if self.p_list.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::validation("every p must lie in [0, 1]"));
        }
        if self.trials == 0 {
            return Err(Error::validation("trials must be positive"));
        }
        self.train.validate()
    }
}
