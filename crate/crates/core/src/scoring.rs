//! Pose performance scoring.
//!
//! Turns raw docking outcomes (RMSD in angstroms plus a PoseBusters validity
//! flag) into composite scores in `[0, 1]`, and materializes the
//! instance-by-algorithm label matrix that training and evaluation consume.
//!
//! The geometric score is a normalized decreasing exponential clipped at an
//! upper tolerance `M`:
//!
//! ```text
//! s_rmsd(x) = (e^M - e^x) / (e^M - 1)   for x <= M,   0 otherwise
//! ```
//!
//! so `s_rmsd(0) = 1` and `s_rmsd(M) = 0`. Validity is all-or-nothing:
//! `s_pb = 1` iff every PoseBusters check passed. The two combine either
//! additively (`alpha * s_rmsd + (1 - alpha) * s_pb`) or multiplicatively
//! (`s_rmsd * s_pb`, an RMSD score gated by validity).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the RMSD tolerance `M`. Beyond this the exponential score
/// is numerically indistinguishable from a step function and `e^M` starts to
/// dwarf every other term.
pub const MAX_TOLERANCE_M: f64 = 20.0;

/// Tolerance producing an e-fold range of 11 discrete deviations, `ln 11`.
/// Default for [`ScoreConfig`].
pub const LN_11: f64 = 2.3978952727983707;

/// One `(instance, algorithm)` docking outcome.
///
/// `rmsd == None` means the tool produced no pose at all; such records score
/// zero everywhere downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRecord {
    pub instance_id: String,
    pub algorithm_id: String,
    /// Symmetry-corrected RMSD to the reference pose, in angstroms.
    pub rmsd: Option<f64>,
    /// True iff all 18 PoseBusters checks passed.
    pub pb_valid: bool,
}

impl PerformanceRecord {
    pub fn validate(&self) -> Result<()> {
        if let Some(x) = self.rmsd {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "rmsd for ({}, {}) must be finite and non-negative, got {x}",
                    self.instance_id, self.algorithm_id
                )));
            }
        }
        Ok(())
    }
}

/// Uniquely keyed collection of performance records.
#[derive(Debug, Clone, Default)]
pub struct PerformanceTable {
    records: Vec<PerformanceRecord>,
    index: HashMap<(String, String), usize>,
}

impl PerformanceTable {
    /// Builds a table, validating every record and rejecting duplicate
    /// `(instance, algorithm)` pairs.
    pub fn from_records(records: Vec<PerformanceRecord>) -> Result<Self> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, rec) in records.iter().enumerate() {
            rec.validate()?;
            let key = (rec.instance_id.clone(), rec.algorithm_id.clone());
            if index.insert(key, i).is_some() {
                return Err(Error::Schema(format!(
                    "duplicate performance record for ({}, {})",
                    rec.instance_id, rec.algorithm_id
                )));
            }
        }
        Ok(Self { records, index })
    }

    pub fn get(&self, instance_id: &str, algorithm_id: &str) -> Option<&PerformanceRecord> {
        self.index
            .get(&(instance_id.to_string(), algorithm_id.to_string()))
            .map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[PerformanceRecord] {
        &self.records
    }

    /// Distinct instance ids in lexicographic order.
    pub fn instance_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.records.iter().map(|r| r.instance_id.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    /// Distinct algorithm ids in order of first appearance.
    pub fn algorithm_ids(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for rec in &self.records {
            if !seen.iter().any(|a| a == &rec.algorithm_id) {
                seen.push(rec.algorithm_id.clone());
            }
        }
        seen
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Table restricted to records of the given algorithms, preserving
    /// record order.
    pub fn retain_algorithms(&self, keep: &[String]) -> PerformanceTable {
        let records: Vec<PerformanceRecord> = self
            .records
            .iter()
            .filter(|r| keep.contains(&r.algorithm_id))
            .cloned()
            .collect();
        Self::from_records(records).expect("subset of a valid table stays valid")
    }
}

/// How the RMSD and validity scores combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// `alpha * s_rmsd + (1 - alpha) * s_pb`
    Additive,
    /// `s_rmsd * s_pb`
    Multiplicative,
}

/// Composite-score parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub mode: ScoreMode,
    /// RMSD tolerance `M` in angstroms; scores clip to zero above it.
    pub tolerance_m: f64,
    /// Mixing weight in `[0, 1]`; used only in additive mode.
    pub alpha: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            mode: ScoreMode::Multiplicative,
            tolerance_m: LN_11,
            alpha: 0.5,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        validate_tolerance(self.tolerance_m)?;
        if !self.alpha.is_finite() || !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

fn validate_tolerance(m_tol: f64) -> Result<()> {
    if !m_tol.is_finite() || m_tol <= 0.0 || m_tol > MAX_TOLERANCE_M {
        return Err(Error::InvalidConfig(format!(
            "tolerance M must lie in (0, {MAX_TOLERANCE_M}], got {m_tol}"
        )));
    }
    Ok(())
}

/// Exponential RMSD score clipped at tolerance `m_tol`.
///
/// Strictly decreasing on `[0, M]` with `s(0) = 1` and `s(x) = 0` for
/// `x >= M`.
pub fn rmsd_score(x: f64, m_tol: f64) -> Result<f64> {
    validate_tolerance(m_tol)?;
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidInput(format!(
            "rmsd must be finite and non-negative, got {x}"
        )));
    }
    Ok(rmsd_score_unchecked(x, m_tol, m_tol.exp()))
}

/// Scoring kernel with `e^M` hoisted out; inputs assumed validated.
#[inline]
fn rmsd_score_unchecked(x: f64, m_tol: f64, exp_m: f64) -> f64 {
    if x > m_tol {
        0.0
    } else {
        (exp_m - x.exp()) / (exp_m - 1.0)
    }
}

/// Validity score: 1 iff all checks passed.
pub fn pb_score(pb_valid: bool) -> f64 {
    if pb_valid {
        1.0
    } else {
        0.0
    }
}

/// Conjunction of individual check outcomes, for inputs that ship the
/// per-check columns instead of the precomputed flag.
pub fn conjoin_checks(checks: &[bool]) -> bool {
    checks.iter().all(|&c| c)
}

/// Composite score of one record under `cfg`. A missing pose scores 0.
pub fn composite_score(rec: &PerformanceRecord, cfg: &ScoreConfig) -> Result<f64> {
    cfg.validate()?;
    rec.validate()?;
    Ok(composite_score_unchecked(rec, cfg, cfg.tolerance_m.exp()))
}

#[inline]
fn composite_score_unchecked(rec: &PerformanceRecord, cfg: &ScoreConfig, exp_m: f64) -> f64 {
    let x = match rec.rmsd {
        Some(x) => x,
        None => return 0.0,
    };
    let s_rmsd = rmsd_score_unchecked(x, cfg.tolerance_m, exp_m);
    let s_pb = pb_score(rec.pb_valid);
    match cfg.mode {
        ScoreMode::Additive => cfg.alpha * s_rmsd + (1.0 - cfg.alpha) * s_pb,
        ScoreMode::Multiplicative => s_rmsd * s_pb,
    }
}

/// Instance-by-algorithm matrix of composite scores in `[0, 1]`.
///
/// Rows are sorted lexicographically by instance id so fold splits are
/// reproducible across runs; columns follow the portfolio order given at
/// build time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMatrix {
    pub scores: Vec<Vec<f64>>,
    pub instance_ids: Vec<String>,
    pub algorithm_ids: Vec<String>,
}

impl LabelMatrix {
    /// Number of instances (rows).
    pub fn n(&self) -> usize {
        self.instance_ids.len()
    }

    /// Number of algorithms (columns).
    pub fn m(&self) -> usize {
        self.algorithm_ids.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i]
    }

    /// Row position of `instance_id`, exploiting the sorted row order.
    pub fn instance_index(&self, instance_id: &str) -> Option<usize> {
        self.instance_ids
            .binary_search_by(|id| id.as_str().cmp(instance_id))
            .ok()
    }

    /// New matrix holding only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> LabelMatrix {
        LabelMatrix {
            scores: rows.iter().map(|&i| self.scores[i].clone()).collect(),
            instance_ids: rows.iter().map(|&i| self.instance_ids[i].clone()).collect(),
            algorithm_ids: self.algorithm_ids.clone(),
        }
    }

    pub fn column_mean(&self, j: usize) -> f64 {
        if self.scores.is_empty() {
            return 0.0;
        }
        self.scores.iter().map(|row| row[j]).sum::<f64>() / self.scores.len() as f64
    }
}

/// Scores every record and lays the results out as a [`LabelMatrix`].
///
/// Entry `[i][j]` is the composite score of instance `i` under algorithm `j`,
/// or 0 where no record exists. Records referencing algorithms outside
/// `portfolio` and duplicate `(instance, algorithm)` pairs are rejected.
pub fn build_label_matrix(
    records: &[PerformanceRecord],
    portfolio: &[String],
    cfg: &ScoreConfig,
) -> Result<LabelMatrix> {
    cfg.validate()?;
    let col: HashMap<&str, usize> = portfolio
        .iter()
        .enumerate()
        .map(|(j, a)| (a.as_str(), j))
        .collect();
    if col.len() != portfolio.len() {
        return Err(Error::Schema("portfolio contains duplicate ids".into()));
    }

    let mut instance_ids: Vec<String> = records.iter().map(|r| r.instance_id.clone()).collect();
    instance_ids.sort();
    instance_ids.dedup();
    let row: HashMap<&str, usize> = instance_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let exp_m = cfg.tolerance_m.exp();
    let mut scores = vec![vec![0.0; portfolio.len()]; instance_ids.len()];
    let mut seen = vec![false; instance_ids.len() * portfolio.len().max(1)];
    for rec in records {
        rec.validate()?;
        let j = *col.get(rec.algorithm_id.as_str()).ok_or_else(|| {
            Error::Schema(format!(
                "record for instance {} references algorithm {} outside the portfolio",
                rec.instance_id, rec.algorithm_id
            ))
        })?;
        let i = row[rec.instance_id.as_str()];
        let flat = i * portfolio.len() + j;
        if seen[flat] {
            return Err(Error::Schema(format!(
                "duplicate performance record for ({}, {})",
                rec.instance_id, rec.algorithm_id
            )));
        }
        seen[flat] = true;
        scores[i][j] = composite_score_unchecked(rec, cfg, exp_m);
    }

    Ok(LabelMatrix {
        scores,
        instance_ids,
        algorithm_ids: portfolio.to_vec(),
    })
}
