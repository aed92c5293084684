//! Run configuration: one TOML file, CLI-flag overrides, echoed verbatim
//! into every output directory so runs stay reproducible.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::GatedMetricSpec;
use crate::losses::LossConfig;
use crate::model::train::TrainConfig;
use crate::model::{ArchitectureSpec, DecoderVariant};
use crate::scoring::ScoreConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub variant: DecoderVariant,
    pub hidden_dims: (usize, usize),
    pub blocks_per_stack: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            variant: DecoderVariant::Residual,
            hidden_dims: (256, 128),
            blocks_per_stack: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            batch_size: t.batch_size,
            adam_beta1: t.adam_beta1,
            adam_beta2: t.adam_beta2,
            adam_epsilon: t.adam_epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Cross-validation fold count.
    pub k: usize,
    /// Gate thresholds in angstroms; each becomes one reported metric.
    pub rmsd_thresholds: Vec<f64>,
    pub require_pb_valid: bool,
    /// Held-out fraction for fixed-split commands (ablation).
    pub test_fraction: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            k: 10,
            rmsd_thresholds: vec![1.0, 2.0],
            require_pb_valid: true,
            test_fraction: 0.1,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub score: ScoreConfig,
    pub loss: LossConfig,
    pub model: ModelSection,
    pub train: TrainSection,
    pub eval: EvalSection,
}

impl RunConfig {
    /// Reads a config file, or the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p)?;
                let cfg: RunConfig = toml::from_str(&text)
                    .map_err(|e| Error::parse(p.display().to_string(), 0, e.to_string()))?;
                Ok(cfg)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.score.validate()?;
        self.train_config().validate()?;
        if self.eval.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "eval.k must be at least 2, got {}",
                self.eval.k
            )));
        }
        if self.eval.rmsd_thresholds.is_empty() {
            return Err(Error::InvalidConfig(
                "eval.rmsd_thresholds must not be empty".into(),
            ));
        }
        for spec in self.metric_specs() {
            spec.validate()?;
        }
        if !(0.0..1.0).contains(&self.eval.test_fraction) || self.eval.test_fraction == 0.0 {
            return Err(Error::InvalidConfig(format!(
                "eval.test_fraction must lie in (0, 1), got {}",
                self.eval.test_fraction
            )));
        }
        Ok(())
    }

    pub fn arch_spec(&self, input_dim: usize, output_dim: usize) -> ArchitectureSpec {
        ArchitectureSpec {
            input_dim,
            output_dim,
            variant: self.model.variant,
            hidden_dims: self.model.hidden_dims,
            blocks_per_stack: self.model.blocks_per_stack,
            seed: self.seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            loss: self.loss,
            learning_rate: self.train.learning_rate,
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            adam_beta1: self.train.adam_beta1,
            adam_beta2: self.train.adam_beta2,
            adam_epsilon: self.train.adam_epsilon,
            seed: self.seed,
        }
    }

    pub fn metric_specs(&self) -> Vec<GatedMetricSpec> {
        self.eval
            .rmsd_thresholds
            .iter()
            .map(|&t| GatedMetricSpec {
                rmsd_threshold: t,
                require_pb_valid: self.eval.require_pb_valid,
            })
            .collect()
    }

    /// Serialized form written next to every command's outputs.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("config serialization: {e}")))
    }
}
