//! Run configuration file: one TOML document mirroring the training,
//! search and split settings, every key optional. Unknown keys are
//! rejected so typos fail fast instead of silently using a default.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use awlssvm_core::{SearchSpace, SplitPlan, TrainConfig};

use crate::CliError;

fn default_folds() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub search: SearchSpace,
    pub split: SplitPlan,
    pub folds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train: TrainConfig::default(),
            search: SearchSpace::default(),
            split: SplitPlan::default(),
            folds: default_folds(),
        }
    }
}

impl RunConfig {
    /// Parse and validate a configuration file; `None` means all defaults.
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        let config = match path {
            None => RunConfig::default(),
            Some(p) => {
                let raw = fs::read_to_string(p).map_err(|e| {
                    CliError::validation(format!("cannot read config {}: {e}", p.display()))
                })?;
                toml::from_str(&raw).map_err(|e| {
                    CliError::validation(format!("config {}: {e}", p.display()))
                })?
            }
        };
        config.train.validate()?;
        config.search.validate()?;
        config.split.validate()?;
        if config.folds < 2 {
            return Err(CliError::validation(format!(
                "folds = {} is invalid: need at least 2",
                config.folds
            )));
        }
        Ok(config)
    }
}
