//! The experimental harness: gated success metrics, VBS/SBS baselines,
//! portfolio refinement, k-fold cross-validation, score ablation grids, and
//! paired significance tests.

pub mod report;
pub mod stats;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Scaler;
use crate::model::train::{train, TrainConfig};
use crate::model::{argmax, select, ArchitectureSpec, DecoderParams};
use crate::scoring::{build_label_matrix, LabelMatrix, PerformanceTable, ScoreConfig};

pub use report::{
    load_report, render_frequencies, render_report, save_report, EvalReport, FoldMetricRates,
    FoldReport, MetricSummary, ReportMetadata, REPORT_SCHEMA_VERSION,
};
pub use stats::{paired_t_test, wilcoxon_signed_rank, EXACT_WILCOXON_MAX_N};

/// Success gate: RMSD at or below a threshold, optionally requiring
/// PoseBusters validity as well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GatedMetricSpec {
    pub rmsd_threshold: f64,
    pub require_pb_valid: bool,
}

impl GatedMetricSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.rmsd_threshold.is_finite() || self.rmsd_threshold <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "rmsd threshold must be positive, got {}",
                self.rmsd_threshold
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        if self.require_pb_valid {
            format!("RMSD<={}A & PB-valid", self.rmsd_threshold)
        } else {
            format!("RMSD<={}A", self.rmsd_threshold)
        }
    }
}

/// The two canonical reporting gates: 1 A and 2 A, both PB-valid.
pub fn canonical_metrics() -> Vec<GatedMetricSpec> {
    vec![
        GatedMetricSpec {
            rmsd_threshold: 1.0,
            require_pb_valid: true,
        },
        GatedMetricSpec {
            rmsd_threshold: 2.0,
            require_pb_valid: true,
        },
    ]
}

/// Per-instance algorithm choice, instance id to algorithm id.
pub type Selections = BTreeMap<String, String>;

/// `(successes, total)` under the gate; unresolvable selections (no record,
/// or a record without a pose) count as failures.
pub fn gated_success_counts(
    selections: &Selections,
    table: &PerformanceTable,
    spec: &GatedMetricSpec,
) -> (usize, usize) {
    let mut successes = 0;
    for (instance, algorithm) in selections {
        if let Some(rec) = table.get(instance, algorithm) {
            let rmsd_ok = rec.rmsd.is_some_and(|x| x <= spec.rmsd_threshold);
            let pb_ok = !spec.require_pb_valid || rec.pb_valid;
            if rmsd_ok && pb_ok {
                successes += 1;
            }
        }
    }
    (successes, selections.len())
}

/// Fraction of instances whose selected pose passes the gate.
pub fn gated_success(
    selections: &Selections,
    table: &PerformanceTable,
    spec: &GatedMetricSpec,
) -> f64 {
    let (successes, total) = gated_success_counts(selections, table, spec);
    if total == 0 {
        0.0
    } else {
        successes as f64 / total as f64
    }
}

/// Virtual best solver: the per-instance argmax of the label rows, ties to
/// the lowest algorithm index.
pub fn vbs_selection(labels: &LabelMatrix) -> Selections {
    labels
        .instance_ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            (
                id.clone(),
                labels.algorithm_ids[argmax(labels.row(i))].clone(),
            )
        })
        .collect()
}

/// Single best solver: the column with the highest mean composite score on
/// the training labels. Returns the column index.
pub fn sbs_algorithm(train_labels: &LabelMatrix) -> Result<usize> {
    if train_labels.m() == 0 || train_labels.n() == 0 {
        return Err(Error::InvalidInput(
            "sbs needs a nonempty label matrix".into(),
        ));
    }
    let means: Vec<f64> = (0..train_labels.m())
        .map(|j| train_labels.column_mean(j))
        .collect();
    Ok(argmax(&means))
}

/// The `k` algorithms with the highest mean training score, in their
/// original portfolio order.
pub fn refine_portfolio(train_labels: &LabelMatrix, k: usize) -> Result<Vec<String>> {
    let m = train_labels.m();
    if k == 0 || k > m {
        return Err(Error::InvalidConfig(format!(
            "refined portfolio size {k} must lie in [1, {m}]"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    let means: Vec<f64> = (0..m).map(|j| train_labels.column_mean(j)).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = order.into_iter().take(k).collect();
    kept.sort_unstable();
    Ok(kept
        .into_iter()
        .map(|j| train_labels.algorithm_ids[j].clone())
        .collect())
}

/// Instance-to-fold assignment; folds partition the instances with sizes
/// differing by at most one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignments.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle followed by round-robin fold assignment.
pub fn kfold_split(instance_ids: &[String], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if instance_ids.len() < k {
        return Err(Error::InvalidConfig(format!(
            "cannot split {} instances into {k} folds",
            instance_ids.len()
        )));
    }
    let mut shuffled: Vec<&String> = instance_ids.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let mut assignments = BTreeMap::new();
    for (i, id) in shuffled.into_iter().enumerate() {
        if assignments.insert(id.clone(), i % k).is_some() {
            return Err(Error::Schema(format!("duplicate instance_id {id}")));
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

/// One train/test partition, by instance id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Seeded single split holding out `test_fraction` of the instances
/// (at least one on each side).
pub fn fixed_split(instance_ids: &[String], test_fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(0.0..1.0).contains(&test_fraction) || test_fraction == 0.0 {
        return Err(Error::InvalidConfig(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    if instance_ids.len() < 2 {
        return Err(Error::InvalidConfig(
            "a fixed split needs at least 2 instances".into(),
        ));
    }
    let mut shuffled: Vec<&String> = instance_ids.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let n_test = ((instance_ids.len() as f64 * test_fraction).round() as usize)
        .clamp(1, instance_ids.len() - 1);
    let mut test: Vec<String> = shuffled[..n_test].iter().map(|s| s.to_string()).collect();
    let mut train: Vec<String> = shuffled[n_test..].iter().map(|s| s.to_string()).collect();
    test.sort();
    train.sort();
    Ok(SplitPlan { train, test })
}

/// Borrowed, join-validated inputs for the evaluation entry points.
#[derive(Debug, Clone, Copy)]
pub struct EvalData<'a> {
    pub features: &'a [Vec<f64>],
    pub instance_ids: &'a [String],
    pub table: &'a PerformanceTable,
    pub portfolio: &'a [String],
}

impl<'a> EvalData<'a> {
    pub fn validate(&self) -> Result<()> {
        if self.features.len() != self.instance_ids.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows vs {} instance ids",
                self.features.len(),
                self.instance_ids.len()
            )));
        }
        if self.instance_ids.is_empty() {
            return Err(Error::InvalidInput("no instances to evaluate".into()));
        }
        for pair in self.instance_ids.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::Schema(
                    "instance ids must be sorted and unique (canonical row order)".into(),
                ));
            }
        }
        let d = self.features[0].len();
        if d == 0 {
            return Err(Error::Schema("feature rows are empty".into()));
        }
        if let Some((i, row)) = self
            .features
            .iter()
            .enumerate()
            .find(|(_, row)| row.len() != d)
        {
            return Err(Error::ShapeMismatch(format!(
                "feature row {i} has {} values, expected {d}",
                row.len()
            )));
        }
        if self.table.instance_ids() != self.instance_ids {
            return Err(Error::Schema(
                "performance table and features disagree on the instance set".into(),
            ));
        }
        for algo in self.table.algorithm_ids() {
            if !self.portfolio.contains(&algo) {
                return Err(Error::Schema(format!(
                    "performance references algorithm {algo} outside the portfolio"
                )));
            }
        }
        Ok(())
    }

    fn feature_dim(&self) -> usize {
        self.features[0].len()
    }
}

/// Splitmix-style seed derivation so per-fold runs decorrelate without any
/// shared RNG state.
fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_arch(data: &EvalData, arch: &ArchitectureSpec) -> Result<()> {
    arch.validate()?;
    if arch.input_dim != data.feature_dim() {
        return Err(Error::ShapeMismatch(format!(
            "decoder input_dim {} but features have {} dims",
            arch.input_dim,
            data.feature_dim()
        )));
    }
    if arch.output_dim != data.portfolio.len() {
        return Err(Error::ShapeMismatch(format!(
            "decoder output_dim {} but portfolio has {} algorithms",
            arch.output_dim,
            data.portfolio.len()
        )));
    }
    Ok(())
}

/// Trains on the given rows (standardizing features on them alone) and
/// returns the trained decoder plus its scaler.
fn train_on_rows(
    data: &EvalData,
    labels: &LabelMatrix,
    train_rows: &[usize],
    arch: &ArchitectureSpec,
    train_cfg: &TrainConfig,
) -> Result<(DecoderParams, Scaler)> {
    let scaler = Scaler::fit(data.features, train_rows)?;
    let train_x = scaler.transform_rows(data.features, train_rows)?;
    let train_labels = labels.select_rows(train_rows);
    let (params, _) = train(&train_x, &train_labels, arch, train_cfg)?;
    Ok((params, scaler))
}

fn selector_selections(
    data: &EvalData,
    params: &DecoderParams,
    scaler: &Scaler,
    rows: &[usize],
) -> Result<Selections> {
    let mut selections = Selections::new();
    for &r in rows {
        let x = scaler.transform_row(&data.features[r])?;
        let j = select(params, &x)?;
        selections.insert(data.instance_ids[r].clone(), data.portfolio[j].clone());
    }
    Ok(selections)
}

fn constant_selections(data: &EvalData, rows: &[usize], algorithm: &str) -> Selections {
    rows.iter()
        .map(|&r| (data.instance_ids[r].clone(), algorithm.to_string()))
        .collect()
}

/// Per-algorithm selection counts in portfolio order, zeros included.
pub fn selection_frequencies(selections: &Selections, portfolio: &[String]) -> Vec<u64> {
    let mut counts = vec![0u64; portfolio.len()];
    for algorithm in selections.values() {
        if let Some(j) = portfolio.iter().position(|a| a == algorithm) {
            counts[j] += 1;
        }
    }
    counts
}

/// Two-sided Wilcoxon signed-rank test on paired per-fold values; the
/// default significance test for this harness.
pub fn paired_significance(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    wilcoxon_signed_rank(sample_a, sample_b)
}

struct FoldOutcome {
    fold: usize,
    test_size: usize,
    sbs_name: String,
    /// Per metric: (selector, sbs, vbs) success counts.
    counts: Vec<(usize, usize, usize)>,
    /// Per metric, per algorithm: success counts of the constant selection.
    standalone_counts: Vec<Vec<usize>>,
    selector_freq: Vec<u64>,
    vbs_freq: Vec<u64>,
}

/// Full cross-validation protocol.
///
/// For every fold: standardize features on the training split, train a
/// fresh decoder on training labels, select on the held-out split, and
/// score the selector against the train-determined SBS and the label-argmax
/// VBS under every gate. Folds run independently (in parallel when a rayon
/// pool is configured) and the assembled report is deterministic for a
/// fixed `(data, config, seed)`.
#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    data: &EvalData,
    score_cfg: &ScoreConfig,
    arch: &ArchitectureSpec,
    train_cfg: &TrainConfig,
    metrics: &[GatedMetricSpec],
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    data.validate()?;
    check_arch(data, arch)?;
    score_cfg.validate()?;
    train_cfg.validate()?;
    if metrics.is_empty() {
        return Err(Error::InvalidConfig("no gated metrics requested".into()));
    }
    for m in metrics {
        m.validate()?;
    }

    let labels = build_label_matrix(data.table.records(), data.portfolio, score_cfg)?;
    if labels.instance_ids != data.instance_ids {
        return Err(Error::Internal(
            "label matrix row order diverged from dataset order".into(),
        ));
    }
    let plan = kfold_split(data.instance_ids, k, seed)?;
    let fold_rows: Vec<Vec<usize>> = (0..k)
        .map(|f| {
            data.instance_ids
                .iter()
                .enumerate()
                .filter(|(_, id)| plan.assignments[*id] == f)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    let outcomes: Vec<FoldOutcome> = (0..k)
        .into_par_iter()
        .map(|f| -> Result<FoldOutcome> {
            let test_rows = &fold_rows[f];
            let train_rows: Vec<usize> = (0..data.instance_ids.len())
                .filter(|i| !test_rows.contains(i))
                .collect();

            let fold_arch = ArchitectureSpec {
                seed: mix_seed(arch.seed, f as u64 + 1),
                ..arch.clone()
            };
            let fold_train = TrainConfig {
                seed: mix_seed(train_cfg.seed, f as u64 + 1),
                ..train_cfg.clone()
            };
            let (params, scaler) =
                train_on_rows(data, &labels, &train_rows, &fold_arch, &fold_train)?;

            let selector = selector_selections(data, &params, &scaler, test_rows)?;
            let train_labels = labels.select_rows(&train_rows);
            let sbs_j = sbs_algorithm(&train_labels)?;
            let sbs_name = data.portfolio[sbs_j].clone();
            let sbs = constant_selections(data, test_rows, &sbs_name);
            let test_labels = labels.select_rows(test_rows);
            let vbs = vbs_selection(&test_labels);

            let mut counts = Vec::with_capacity(metrics.len());
            let mut standalone_counts = Vec::with_capacity(metrics.len());
            for spec in metrics {
                let (sel, _) = gated_success_counts(&selector, data.table, spec);
                let (sbs_c, _) = gated_success_counts(&sbs, data.table, spec);
                let (vbs_c, _) = gated_success_counts(&vbs, data.table, spec);
                counts.push((sel, sbs_c, vbs_c));
                standalone_counts.push(
                    data.portfolio
                        .iter()
                        .map(|algo| {
                            gated_success_counts(
                                &constant_selections(data, test_rows, algo),
                                data.table,
                                spec,
                            )
                            .0
                        })
                        .collect(),
                );
            }

            Ok(FoldOutcome {
                fold: f,
                test_size: test_rows.len(),
                sbs_name,
                counts,
                standalone_counts,
                selector_freq: selection_frequencies(&selector, data.portfolio),
                vbs_freq: selection_frequencies(&vbs, data.portfolio),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    assemble_report(data, score_cfg, metrics, k, seed, outcomes)
}

fn assemble_report(
    data: &EvalData,
    score_cfg: &ScoreConfig,
    metrics: &[GatedMetricSpec],
    k: usize,
    seed: u64,
    outcomes: Vec<FoldOutcome>,
) -> Result<EvalReport> {
    let n_total = data.instance_ids.len();
    let m = data.portfolio.len();
    let mut selector_frequencies = vec![0u64; m];
    let mut vbs_frequencies = vec![0u64; m];
    let mut folds = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        for (acc, v) in selector_frequencies.iter_mut().zip(&o.selector_freq) {
            *acc += v;
        }
        for (acc, v) in vbs_frequencies.iter_mut().zip(&o.vbs_freq) {
            *acc += v;
        }
        let rates = metrics
            .iter()
            .enumerate()
            .map(|(mi, spec)| {
                let (sel, sbs, vbs) = o.counts[mi];
                let denom = o.test_size as f64;
                FoldMetricRates {
                    metric: *spec,
                    selector: sel as f64 / denom,
                    sbs: sbs as f64 / denom,
                    vbs: vbs as f64 / denom,
                    per_algorithm: o.standalone_counts[mi]
                        .iter()
                        .map(|&c| c as f64 / denom)
                        .collect(),
                }
            })
            .collect();
        folds.push(FoldReport {
            fold: o.fold,
            test_size: o.test_size,
            sbs_algorithm: o.sbs_name.clone(),
            rates,
        });
    }

    let mut summaries = Vec::with_capacity(metrics.len());
    for (mi, spec) in metrics.iter().enumerate() {
        let selector_rates: Vec<f64> = folds.iter().map(|f| f.rates[mi].selector).collect();
        let sbs_rates: Vec<f64> = folds.iter().map(|f| f.rates[mi].sbs).collect();
        let vbs_rates: Vec<f64> = folds.iter().map(|f| f.rates[mi].vbs).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let selector_mean = mean(&selector_rates);
        let sbs_mean = mean(&sbs_rates);
        let vbs_mean = mean(&vbs_rates);
        let p_selector_vs_sbs = if folds.len() >= 5 {
            Some(wilcoxon_signed_rank(&selector_rates, &sbs_rates)?)
        } else {
            None
        };
        // Standalone algorithms are scored over the union of the test folds.
        let standalone_rates: Vec<f64> = (0..m)
            .map(|j| {
                let successes: usize = outcomes.iter().map(|o| o.standalone_counts[mi][j]).sum();
                successes as f64 / n_total as f64
            })
            .collect();
        summaries.push(MetricSummary {
            metric: *spec,
            selector_mean,
            sbs_mean,
            vbs_mean,
            delta_vs_sbs: selector_mean - sbs_mean,
            p_selector_vs_sbs,
            p_vs_baseline: None,
            standalone_rates,
        });
    }

    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        metadata: ReportMetadata {
            k,
            seed,
            n_instances: n_total,
            portfolio: data.portfolio.to_vec(),
            score: *score_cfg,
        },
        metrics: summaries,
        folds,
        selector_frequencies,
        vbs_frequencies,
    })
}

/// One ablation grid: selector gated rates (in percent) per `(M, alpha)`
/// cell plus an optional multiplicative column, all on one fixed split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationGrid {
    pub m_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub include_multiplicative: bool,
    pub metrics: Vec<GatedMetricSpec>,
    /// `cells[metric][m_index][column]`, columns are the alphas followed by
    /// the multiplicative column when enabled.
    pub cells: Vec<Vec<Vec<f64>>>,
}

impl AblationGrid {
    pub fn columns(&self) -> usize {
        self.alpha_values.len() + usize::from(self.include_multiplicative)
    }

    /// Column headers: one per alpha, then `s_mul` when enabled.
    pub fn column_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self
            .alpha_values
            .iter()
            .map(|a| format!("alpha_{a}"))
            .collect();
        if self.include_multiplicative {
            labels.push("s_mul".into());
        }
        labels
    }
}

/// Runs the score ablation on a fixed train/test split.
///
/// Every cell retrains the baseline decoder with BCE only (the loss weights
/// in `train_cfg` are overridden), so cells differ only in how the labels
/// were scored.
#[allow(clippy::too_many_arguments)]
pub fn ablation_grid(
    data: &EvalData,
    arch: &ArchitectureSpec,
    train_cfg: &TrainConfig,
    m_values: &[f64],
    alpha_values: &[f64],
    include_multiplicative: bool,
    split: &SplitPlan,
    metrics: &[GatedMetricSpec],
) -> Result<AblationGrid> {
    data.validate()?;
    check_arch(data, arch)?;
    if m_values.is_empty() {
        return Err(Error::InvalidConfig("ablation needs at least one M".into()));
    }
    if alpha_values.is_empty() && !include_multiplicative {
        return Err(Error::InvalidConfig(
            "ablation needs alpha values or the multiplicative column".into(),
        ));
    }
    if metrics.is_empty() {
        return Err(Error::InvalidConfig("no gated metrics requested".into()));
    }
    for m in metrics {
        m.validate()?;
    }

    // The ablation isolates the scoring function; train on the plain BCE
    // baseline regardless of the requested composite loss.
    let baseline_cfg = TrainConfig {
        loss: crate::losses::LossConfig {
            sigma: train_cfg.loss.sigma,
            weight_bce: 1.0,
            weight_pl: 0.0,
            weight_ndcg: 0.0,
        },
        ..train_cfg.clone()
    };
    baseline_cfg.validate()?;

    let row_of = |id: &String| -> Result<usize> {
        data.instance_ids
            .binary_search(id)
            .map_err(|_| Error::Schema(format!("split references unknown instance {id}")))
    };
    let train_rows: Vec<usize> = split.train.iter().map(row_of).collect::<Result<_>>()?;
    let test_rows: Vec<usize> = split.test.iter().map(row_of).collect::<Result<_>>()?;
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(Error::InvalidConfig(
            "ablation split needs nonempty train and test sides".into(),
        ));
    }

    let mut cell_configs = Vec::new();
    for &m_tol in m_values {
        for &alpha in alpha_values {
            cell_configs.push(ScoreConfig {
                mode: crate::scoring::ScoreMode::Additive,
                tolerance_m: m_tol,
                alpha,
            });
        }
        if include_multiplicative {
            cell_configs.push(ScoreConfig {
                mode: crate::scoring::ScoreMode::Multiplicative,
                tolerance_m: m_tol,
                alpha: 0.5,
            });
        }
    }
    for cfg in &cell_configs {
        cfg.validate()?;
    }

    let cell_rates: Vec<Vec<f64>> = cell_configs
        .par_iter()
        .map(|cell_cfg| -> Result<Vec<f64>> {
            let labels = build_label_matrix(data.table.records(), data.portfolio, cell_cfg)?;
            let (params, scaler) = train_on_rows(data, &labels, &train_rows, arch, &baseline_cfg)?;
            let selections = selector_selections(data, &params, &scaler, &test_rows)?;
            Ok(metrics
                .iter()
                .map(|spec| 100.0 * gated_success(&selections, data.table, spec))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;

    let columns = alpha_values.len() + usize::from(include_multiplicative);
    let mut cells = vec![vec![vec![0.0; columns]; m_values.len()]; metrics.len()];
    for (cell, rates) in cell_rates.iter().enumerate() {
        let row = cell / columns;
        let col = cell % columns;
        for (mi, &rate) in rates.iter().enumerate() {
            cells[mi][row][col] = rate;
        }
    }

    Ok(AblationGrid {
        m_values: m_values.to_vec(),
        alpha_values: alpha_values.to_vec(),
        include_multiplicative,
        metrics: metrics.to_vec(),
        cells,
    })
}
