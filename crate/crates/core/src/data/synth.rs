//! Synthetic benchmark generation with known ground truth.
//!
//! Desk-scale datasets whose best algorithm per instance is known by
//! construction, used by the verification harness:
//!
//! * `PlantedSeparable` — features encode a cluster id; each cluster has a
//!   designated algorithm that docks well (~0.5 A, PB-valid) while every
//!   other algorithm lands far outside tolerance.
//! * `DominantAlgorithm` — one algorithm wins everywhere and features carry
//!   no signal; a sound selector must fall back to single-best behavior.
//! * `NoisyComplementary` — per-algorithm RMSD distributions with controlled
//!   overlap plus per-algorithm validity failure rates, so wins are marginal
//!   and robustness matters.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::argmax;
use crate::scoring::{PerformanceRecord, PerformanceTable, ScoreConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthRegime {
    PlantedSeparable,
    DominantAlgorithm,
    NoisyComplementary,
}

impl SynthRegime {
    pub const NAMES: [&'static str; 3] = ["planted", "dominant", "complementary"];
}

impl std::str::FromStr for SynthRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "planted" => Ok(Self::PlantedSeparable),
            "dominant" => Ok(Self::DominantAlgorithm),
            "complementary" => Ok(Self::NoisyComplementary),
            other => Err(Error::InvalidConfig(format!(
                "unknown regime {other:?}; valid regimes: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }
}

/// Generator parameters. `pb_fail_rate` holds one independent per-record
/// validity failure probability per algorithm; empty means no failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_instances: usize,
    pub d: usize,
    pub m: usize,
    pub regime: SynthRegime,
    pub noise_level: f64,
    pub pb_fail_rate: Vec<f64>,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(regime: SynthRegime, n_instances: usize, d: usize, m: usize, seed: u64) -> Self {
        Self {
            n_instances,
            d,
            m,
            regime,
            noise_level: 0.0,
            pb_fail_rate: Vec::new(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_instances == 0 || self.n_instances > 1_000_000 {
            return Err(Error::InvalidConfig(format!(
                "n_instances must lie in [1, 1000000], got {}",
                self.n_instances
            )));
        }
        if self.d == 0 {
            return Err(Error::InvalidConfig("d must be at least 1".into()));
        }
        if self.m == 0 || self.m > 9_999 {
            return Err(Error::InvalidConfig(format!(
                "m must lie in [1, 9999], got {}",
                self.m
            )));
        }
        if !self.noise_level.is_finite() || self.noise_level < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise_level must be non-negative, got {}",
                self.noise_level
            )));
        }
        if !self.pb_fail_rate.is_empty() && self.pb_fail_rate.len() != self.m {
            return Err(Error::InvalidConfig(format!(
                "pb_fail_rate needs {} entries (one per algorithm), got {}",
                self.m,
                self.pb_fail_rate.len()
            )));
        }
        if self.pb_fail_rate.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidConfig(
                "pb_fail_rate entries must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// A generated dataset plus the designed best algorithm per instance.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub dataset: Dataset,
    /// `(instance_id, best_algorithm)` in instance order.
    pub ground_truth: Vec<(String, String)>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Deterministically generates a dataset; equal specs give byte-identical
/// outputs.
#[allow(clippy::needless_range_loop)] // indices drive the cluster arithmetic
pub fn generate_synthetic(spec: &SynthSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, d, m) = (spec.n_instances, spec.d, spec.m);
    let instance_ids: Vec<String> = (0..n).map(|i| format!("inst_{i:06}")).collect();
    let algorithms: Vec<String> = (0..m).map(|j| format!("algo_{j:04}")).collect();

    let mut features = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n * m);
    let mut designated: Vec<Option<usize>> = vec![None; n];

    match spec.regime {
        SynthRegime::PlantedSeparable => {
            let centroids: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
                .collect();
            for i in 0..n {
                let c = i % m;
                designated[i] = Some(c);
                features.push(
                    centroids[c]
                        .iter()
                        .map(|v| v + spec.noise_level * normal(&mut rng))
                        .collect(),
                );
                for j in 0..m {
                    let rmsd = if j == c {
                        0.5 + 0.1 * spec.noise_level * normal(&mut rng).abs()
                    } else {
                        (4.0 + 0.3 * spec.noise_level * normal(&mut rng)).max(3.0)
                    };
                    records.push(PerformanceRecord {
                        instance_id: instance_ids[i].clone(),
                        algorithm_id: algorithms[j].clone(),
                        rmsd: Some(rmsd),
                        pb_valid: true,
                    });
                }
            }
        }
        SynthRegime::DominantAlgorithm => {
            let dominant = rng.random_range(0..m);
            for i in 0..n {
                designated[i] = Some(dominant);
                features.push((0..d).map(|_| normal(&mut rng)).collect());
                for j in 0..m {
                    let rmsd = if j == dominant {
                        0.4 + 0.2 * rng.random_range(0.0..1.0)
                    } else {
                        (2.6 + 2.0 * rng.random_range(0.0..1.0)
                            + spec.noise_level * normal(&mut rng))
                        .max(2.5)
                    };
                    records.push(PerformanceRecord {
                        instance_id: instance_ids[i].clone(),
                        algorithm_id: algorithms[j].clone(),
                        rmsd: Some(rmsd),
                        pb_valid: true,
                    });
                }
            }
        }
        SynthRegime::NoisyComplementary => {
            let centroids: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
                .collect();
            // Per (instance type, algorithm) mean RMSD; the type's own
            // algorithm sits lower but distributions overlap.
            let means: Vec<Vec<f64>> = (0..m)
                .map(|t| {
                    (0..m)
                        .map(|j| {
                            if j == t {
                                0.7 + 0.2 * rng.random_range(0.0..1.0)
                            } else {
                                1.2 + 1.8 * rng.random_range(0.0..1.0)
                            }
                        })
                        .collect()
                })
                .collect();
            for i in 0..n {
                let t = i % m;
                features.push(
                    centroids[t]
                        .iter()
                        .map(|v| v + (0.6 + spec.noise_level) * normal(&mut rng))
                        .collect(),
                );
                for j in 0..m {
                    let rmsd = (means[t][j] + (0.35 + spec.noise_level) * normal(&mut rng)).abs();
                    records.push(PerformanceRecord {
                        instance_id: instance_ids[i].clone(),
                        algorithm_id: algorithms[j].clone(),
                        rmsd: Some(rmsd),
                        pb_valid: true,
                    });
                }
            }
        }
    }

    if !spec.pb_fail_rate.is_empty() {
        for rec in records.iter_mut() {
            let j: usize = rec.algorithm_id[5..].parse().unwrap();
            if spec.pb_fail_rate[j] > 0.0 && rng.random_range(0.0..1.0) < spec.pb_fail_rate[j] {
                rec.pb_valid = false;
            }
        }
    }

    let table = PerformanceTable::from_records(records)?;

    // Ground truth: the designated winner where the regime plants one; for
    // overlapping distributions it is the realized composite-score argmax
    // under the default configuration.
    let ground_truth: Vec<(String, String)> = match spec.regime {
        SynthRegime::NoisyComplementary => {
            let labels = crate::scoring::build_label_matrix(
                table.records(),
                &algorithms,
                &ScoreConfig::default(),
            )?;
            instance_ids
                .iter()
                .map(|id| {
                    let row = labels.instance_index(id).expect("generated instance");
                    (id.clone(), algorithms[argmax(labels.row(row))].clone())
                })
                .collect()
        }
        _ => instance_ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let best = designated[i].expect("regime designates a winner");
                (id.clone(), algorithms[best].clone())
            })
            .collect(),
    };

    let dataset = Dataset::new(
        features,
        instance_ids,
        table,
        algorithms,
        format!(
            "synthetic: regime={:?} n={} d={} m={} noise={} seed={}",
            spec.regime, n, d, m, spec.noise_level, spec.seed
        ),
    )?;
    Ok(SyntheticDataset {
        dataset,
        ground_truth,
    })
}
