//! Per-instance docking algorithm selection.
//!
//! Given precomputed instance features and a table of per-algorithm docking
//! outcomes (RMSD plus PoseBusters validity), this crate scores poses on a
//! multi-criteria composite scale, trains a residual decoder to predict
//! per-algorithm scores with ranking-aware losses, selects algorithms by
//! predicted-score argmax, and evaluates the whole stack against
//! single-best (SBS) and virtual-best (VBS) baselines under k-fold
//! cross-validation.
//!
//! Module map:
//!
//! * [`scoring`] — composite pose scores and the label matrix.
//! * [`losses`] — BCE, pairwise logistic, and NDCG surrogate losses with
//!   analytic gradients.
//! * [`model`] — the residual/plain decoder, Adam, training, checkpoints.
//! * [`evaluation`] — gated metrics, baselines, cross-validation, ablation
//!   grids, significance tests, reports.
//! * [`data`] — CSV ingestion/validation, dataset join, synthetic
//!   benchmarks with planted ground truth.
//! * [`config`] — run configuration for the CLI.

pub mod config;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod losses;
pub mod model;
pub mod scoring;

pub use error::{Error, Result};
