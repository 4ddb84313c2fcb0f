//! Experiment configuration: one TOML file naming the environment, the
//! agent hyperparameters shared by every run, and the (agent, seed) sweep.

use std::path::{Path, PathBuf};

use betadqn_core::agent::{AgentKind, TrainConfig};
use betadqn_core::env::EnvConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid `{field}`: {msg}")]
    Invalid { field: String, msg: String },
}

fn invalid(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub agents: Vec<AgentKind>,
    pub seeds: Vec<u64>,
    /// Concurrent runs; defaults to the number of available cores.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Also write each run's rows as JSON lines.
    #[serde(default)]
    pub jsonl: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    pub env: EnvConfig,
    /// Shared hyperparameters; `kind` and `seed` are set per run.
    #[serde(default)]
    pub agent: TrainConfig,
    pub sweep: SweepConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let cfg: Self = text.parse()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sweep.seeds.is_empty() {
            return Err(invalid("sweep.seeds", "seed list is empty"));
        }
        if self.sweep.agents.is_empty() {
            return Err(invalid("sweep.agents", "agent list is empty"));
        }
        let mut seeds = self.sweep.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.sweep.seeds.len() {
            return Err(invalid("sweep.seeds", "duplicate seeds"));
        }
        if self.sweep.workers == Some(0) {
            return Err(invalid("sweep.workers", "must be at least 1"));
        }
        self.agent.validate().map_err(|e| invalid("agent", e.to_string()))?;
        self.env.build(0).map_err(|e| invalid("env", e.to_string()))?;
        Ok(())
    }

    /// Run configuration for one (agent, seed) pair.
    pub fn train_config(&self, kind: AgentKind, seed: u64) -> TrainConfig {
        TrainConfig { kind, seed, ..self.agent.clone() }
    }

    pub fn workers(&self) -> usize {
        self.sweep.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

impl std::str::FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }
}

/// File name of a run's metrics, `<agent>_seed<N>.csv`.
pub fn run_stem(kind: AgentKind, seed: u64) -> String {
    format!("{}_seed{seed}", kind.name())
}
