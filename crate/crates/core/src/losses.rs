//! Training losses over predicted per-algorithm scores.
//!
//! Three per-instance losses and their weighted composite, each returning the
//! loss value together with its analytic gradient with respect to the
//! predicted score vector:
//!
//! * [`bce_loss`] — elementwise binary cross entropy of logistic-squashed
//!   predictions against soft labels in `[0, 1]`.
//! * [`pl_loss`] — pairwise logistic loss `ln(1 + e^{-sigma (s_i - s_j)})`
//!   summed over every ordered pair whose labels say `i` outranks `j`.
//! * [`ndcg_loss2`] — pairwise surrogate of NDCG where each pair term
//!   `-log2 P_BT(s_i, s_j)` is weighted by
//!   `|G_i - G_j| * |1/D_rank(i) - 1/D_rank(j)|`, gains normalized by the
//!   ideal DCG and ranks taken from the hard permutation that sorts current
//!   predictions descending (ties to the lower index).
//!
//! The rank-dependent NDCG weights are treated as constants in the backward
//! pass; the induced permutation is piecewise constant in the scores, so this
//! is the only convention under which the gradient is well defined.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights and scale for the composite training loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Temperature-like scale of the Bradley-Terry probability.
    pub sigma: f64,
    pub weight_bce: f64,
    pub weight_pl: f64,
    pub weight_ndcg: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            weight_bce: 1.0,
            weight_pl: 0.0,
            weight_ndcg: 0.0,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        let weights = [self.weight_bce, self.weight_pl, self.weight_ndcg];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidConfig(
                "loss weights must be finite and non-negative".into(),
            ));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidConfig(
                "at least one loss weight must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A loss value and its gradient with respect to the predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl LossValue {
    fn zeros(m: usize) -> Self {
        Self {
            value: 0.0,
            grad: vec![0.0; m],
        }
    }
}

/// `ln(1 + e^z)`, stable across the whole real line.
#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Bradley-Terry probability that item `i` outranks item `j` given scores.
///
/// `sigma` must be positive; the output lies in `(0, 1)` and saturates
/// smoothly for large score gaps.
pub fn bt_probability(s_i: f64, s_j: f64, sigma: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    sigmoid(sigma * (s_i - s_j))
}

fn check_same_length(pred: &[f64], labels: &[f64]) -> Result<()> {
    if pred.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "pred has length {} but labels has length {}",
            pred.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// Pairwise logistic ranking loss.
///
/// Sums `ln(1 + e^{-sigma (s_i - s_j)})` over all ordered pairs with
/// `labels[i] > labels[j]`; pairs with equal labels contribute nothing.
pub fn pl_loss(pred: &[f64], labels: &[f64], cfg: &LossConfig) -> Result<LossValue> {
    cfg.validate()?;
    check_same_length(pred, labels)?;
    let m = pred.len();
    let mut out = LossValue::zeros(m);
    for i in 0..m {
        for j in 0..m {
            if labels[i] > labels[j] {
                let d = pred[i] - pred[j];
                out.value += softplus(-cfg.sigma * d);
                // d/dd ln(1+e^{-sigma d}) = -sigma (1 - P_BT)
                let coeff = cfg.sigma * sigmoid(-cfg.sigma * d);
                out.grad[i] -= coeff;
                out.grad[j] += coeff;
            }
        }
    }
    Ok(out)
}

/// Gain of relevance label `y`: `2^y - 1`.
#[inline]
fn gain(y: f64) -> f64 {
    y.exp2() - 1.0
}

/// Positional discount at 1-based rank `r`: `log2(1 + r)`.
#[inline]
fn discount(rank: usize) -> f64 {
    (rank as f64 + 1.0).log2()
}

/// Discounted cumulative gain of labels already laid out in ranked order.
pub fn dcg(labels_in_ranked_order: &[f64]) -> f64 {
    labels_in_ranked_order
        .iter()
        .enumerate()
        .map(|(idx, &y)| gain(y) / discount(idx + 1))
        .sum()
}

/// DCG of the ideal (descending-label) ordering; an upper bound on [`dcg`]
/// over all orderings of the same labels.
pub fn max_dcg(labels: &[f64]) -> f64 {
    let mut sorted = labels.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    dcg(&sorted)
}

/// 1-based rank of each item when sorting `pred` descending, ties broken by
/// the lower index.
fn descending_ranks(pred: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pred.len()).collect();
    order.sort_by(|&a, &b| pred[b].total_cmp(&pred[a]).then(a.cmp(&b)));
    let mut rank = vec![0usize; pred.len()];
    for (pos, &item) in order.iter().enumerate() {
        rank[item] = pos + 1;
    }
    rank
}

/// NDCG-Loss2: rank-weighted pairwise surrogate of NDCG.
///
/// Pair weights use gains normalized by the ideal DCG of `labels` and the
/// discounts at the items' current predicted ranks. All-zero labels yield a
/// zero loss. The weights are frozen for the gradient.
pub fn ndcg_loss2(pred: &[f64], labels: &[f64], cfg: &LossConfig) -> Result<LossValue> {
    cfg.validate()?;
    check_same_length(pred, labels)?;
    let m = pred.len();
    let mut out = LossValue::zeros(m);
    let ideal = max_dcg(labels);
    if ideal <= 0.0 {
        return Ok(out);
    }
    let ranks = descending_ranks(pred);
    let inv_discount: Vec<f64> = ranks.iter().map(|&r| 1.0 / discount(r)).collect();
    let gains: Vec<f64> = labels.iter().map(|&y| gain(y) / ideal).collect();
    for i in 0..m {
        for j in 0..m {
            if labels[i] > labels[j] {
                let w = (gains[i] - gains[j]).abs() * (inv_discount[i] - inv_discount[j]).abs();
                let d = pred[i] - pred[j];
                // -w log2 P_BT = w ln(1+e^{-sigma d}) / ln 2
                out.value += w * softplus(-cfg.sigma * d) / std::f64::consts::LN_2;
                let coeff = w * cfg.sigma * sigmoid(-cfg.sigma * d) / std::f64::consts::LN_2;
                out.grad[i] -= coeff;
                out.grad[j] += coeff;
            }
        }
    }
    Ok(out)
}

/// Binary cross entropy of logistic-squashed raw scores against soft labels.
///
/// Summed over elements; the gradient is `sigmoid(pred) - label` per element.
pub fn bce_loss(pred: &[f64], labels: &[f64]) -> Result<LossValue> {
    check_same_length(pred, labels)?;
    for &y in labels {
        if !y.is_finite() || !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidInput(format!(
                "bce label must lie in [0, 1], got {y}"
            )));
        }
    }
    let mut out = LossValue::zeros(pred.len());
    for (k, (&z, &y)) in pred.iter().zip(labels).enumerate() {
        // -[y ln p + (1-y) ln(1-p)] with p = sigmoid(z)
        out.value += y * softplus(-z) + (1.0 - y) * softplus(z);
        out.grad[k] = sigmoid(z) - y;
    }
    Ok(out)
}

/// Weighted sum of the enabled component losses.
///
/// Value and gradient are both linear in the weights; components with zero
/// weight are skipped entirely.
pub fn composite_loss(pred: &[f64], labels: &[f64], cfg: &LossConfig) -> Result<LossValue> {
    cfg.validate()?;
    check_same_length(pred, labels)?;
    let mut out = LossValue::zeros(pred.len());
    let add = |component: LossValue, weight: f64, out: &mut LossValue| {
        out.value += weight * component.value;
        for (g, c) in out.grad.iter_mut().zip(component.grad) {
            *g += weight * c;
        }
    };
    if cfg.weight_bce > 0.0 {
        add(bce_loss(pred, labels)?, cfg.weight_bce, &mut out);
    }
    if cfg.weight_pl > 0.0 {
        add(pl_loss(pred, labels, cfg)?, cfg.weight_pl, &mut out);
    }
    if cfg.weight_ndcg > 0.0 {
        add(ndcg_loss2(pred, labels, cfg)?, cfg.weight_ndcg, &mut out);
    }
    Ok(out)
}
