//! Mini-batch training of the decoder on composite ranking losses.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{composite_loss, LossConfig};
use crate::model::optimizer::{adam_step, AdamConfig, AdamState};
use crate::model::{backward_into, forward, init_decoder, ArchitectureSpec, DecoderParams};
use crate::scoring::LabelMatrix;

/// Optimization schedule. The paper-side quantities live in `loss`; the rest
/// is ordinary training plumbing with explicit defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossConfig,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Seed for the per-epoch shuffle.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossConfig::default(),
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 32,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        self.adam_config().validate()?;
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    fn adam_config(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

/// Per-epoch mean training loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epoch_mean_loss: Vec<f64>,
}

/// Trains a freshly initialized decoder on aligned features and labels.
///
/// Row `i` of `features` must describe the instance behind row `i` of
/// `labels`. Fully deterministic given the two seeds (architecture and
/// shuffle); `epochs == 0` returns the initialization untouched.
pub fn train(
    features: &[Vec<f64>],
    labels: &LabelMatrix,
    spec: &ArchitectureSpec,
    cfg: &TrainConfig,
) -> Result<(DecoderParams, TrainHistory)> {
    cfg.validate()?;
    spec.validate()?;
    let n = features.len();
    if n == 0 {
        return Err(Error::InvalidInput(
            "training requires at least one instance".into(),
        ));
    }
    if labels.n() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} feature rows vs {} label rows",
            n,
            labels.n()
        )));
    }
    if labels.m() != spec.output_dim {
        return Err(Error::ShapeMismatch(format!(
            "label matrix has {} algorithms, decoder outputs {}",
            labels.m(),
            spec.output_dim
        )));
    }
    for (i, row) in features.iter().enumerate() {
        if row.len() != spec.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "feature row {i} has length {}, expected {}",
                row.len(),
                spec.input_dim
            )));
        }
    }

    let mut params = init_decoder(spec)?;
    let mut history = Vec::with_capacity(cfg.epochs);
    if cfg.epochs == 0 {
        return Ok((
            params,
            TrainHistory {
                epoch_mean_loss: history,
            },
        ));
    }

    let adam_cfg = cfg.adam_config();
    let mut state = AdamState::new(params.param_count());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad_acc = vec![0.0; params.param_count()];

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grad_acc.fill(0.0);
            let inv = 1.0 / batch.len() as f64;
            for &i in batch {
                let (scores, cache) = forward(&params, &features[i])?;
                let lv = composite_loss(&scores, labels.row(i), &cfg.loss)?;
                loss_sum += lv.value;
                let scaled: Vec<f64> = lv.grad.iter().map(|g| g * inv).collect();
                backward_into(&params, &cache, &scaled, &mut grad_acc)?;
            }
            adam_step(params.as_flat_mut(), &grad_acc, &mut state, &adam_cfg)?;
        }
        history.push(loss_sum / n as f64);
    }

    Ok((
        params,
        TrainHistory {
            epoch_mean_loss: history,
        },
    ))
}
