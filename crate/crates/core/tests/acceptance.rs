//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `--nocapture` to see them).
//!
//! Expected values come from independent oracles computed inside this file
//! (closed forms, brute-force pair enumeration, finite differences, exact
//! sign-flip enumeration), never from the code under test.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dockselect::data::synth::{generate_synthetic, SynthRegime, SynthSpec};
use dockselect::evaluation::{
    canonical_metrics, cross_validate, gated_success, kfold_split, render_frequencies, save_report,
    sbs_algorithm, selection_frequencies, vbs_selection, wilcoxon_signed_rank, EvalData,
    Selections,
};
use dockselect::features::Scaler;
use dockselect::losses::{bce_loss, composite_loss, ndcg_loss2, pl_loss, LossConfig};
use dockselect::model::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use dockselect::model::train::TrainConfig;
use dockselect::model::{
    backward, forward, init_decoder, predict, ArchitectureSpec, DecoderVariant,
};
use dockselect::scoring::{
    build_label_matrix, composite_score, pb_score, rmsd_score, PerformanceRecord, ScoreConfig,
    ScoreMode, LN_11,
};

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Brute-force pairwise logistic loss with naive formulas.
fn oracle_pl(pred: &[f64], labels: &[f64], sigma: f64) -> (f64, Vec<f64>) {
    let m = pred.len();
    let mut value = 0.0;
    let mut grad = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            if labels[i] > labels[j] {
                let d = pred[i] - pred[j];
                value += (1.0 + (-sigma * d).exp()).ln();
                let p = 1.0 / (1.0 + (-sigma * d).exp());
                grad[i] -= sigma * (1.0 - p);
                grad[j] += sigma * (1.0 - p);
            }
        }
    }
    (value, grad)
}

/// Brute-force NDCG pair loss under the hard descending-prediction
/// permutation; also returns the frozen pair weights.
fn oracle_ndcg(
    pred: &[f64],
    labels: &[f64],
    sigma: f64,
) -> (f64, Vec<f64>, Vec<(usize, usize, f64)>) {
    let m = pred.len();
    let mut value = 0.0;
    let mut grad = vec![0.0; m];
    let mut pairs = Vec::new();

    let mut sorted = labels.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let ideal: f64 = sorted
        .iter()
        .enumerate()
        .map(|(pos, &y)| (y.exp2() - 1.0) / ((pos as f64 + 2.0).log2()))
        .sum();
    if ideal <= 0.0 {
        return (0.0, grad, pairs);
    }
    let mut rank = vec![0usize; m];
    for i in 0..m {
        let mut r = 1;
        for j in 0..m {
            if pred[j] > pred[i] || (pred[j] == pred[i] && j < i) {
                r += 1;
            }
        }
        rank[i] = r;
    }
    for i in 0..m {
        for j in 0..m {
            if labels[i] > labels[j] {
                let gi = (labels[i].exp2() - 1.0) / ideal;
                let gj = (labels[j].exp2() - 1.0) / ideal;
                let di = 1.0 / ((rank[i] as f64 + 1.0).log2());
                let dj = 1.0 / ((rank[j] as f64 + 1.0).log2());
                let w = (gi - gj).abs() * (di - dj).abs();
                pairs.push((i, j, w));
                let p = 1.0 / (1.0 + (-sigma * (pred[i] - pred[j])).exp());
                value += -w * p.log2();
                grad[i] -= w * sigma * (1.0 - p) / std::f64::consts::LN_2;
                grad[j] += w * sigma * (1.0 - p) / std::f64::consts::LN_2;
            }
        }
    }
    (value, grad, pairs)
}

fn fd_grad(f: impl Fn(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<f64> {
    (0..at.len())
        .map(|k| {
            let mut plus = at.to_vec();
            let mut minus = at.to_vec();
            plus[k] += h;
            minus[k] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

fn assert_rel_close(analytic: &[f64], reference: &[f64], tol: f64, what: &str) {
    for (k, (&a, &r)) in analytic.iter().zip(reference).enumerate() {
        let denom = a.abs().max(r.abs()).max(1.0);
        assert!(
            (a - r).abs() / denom <= tol,
            "{what} component {k}: {a} vs {r}"
        );
    }
}

fn random_pred_labels(rng: &mut ChaCha8Rng, m: usize) -> (Vec<f64>, Vec<f64>) {
    let pred: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
    let labels: Vec<f64> = (0..m)
        .map(|_| {
            if rng.random_bool(0.25) {
                if rng.random_bool(0.5) {
                    0.0
                } else {
                    1.0
                }
            } else {
                rng.random_range(0.0..=1.0)
            }
        })
        .collect();
    (pred, labels)
}

fn eval_data(ds: &dockselect::data::Dataset) -> EvalData<'_> {
    EvalData {
        features: &ds.features,
        instance_ids: &ds.instance_ids,
        table: &ds.table,
        portfolio: &ds.portfolio,
    }
}

fn small_arch(d: usize, m: usize, seed: u64) -> ArchitectureSpec {
    ArchitectureSpec {
        input_dim: d,
        output_dim: m,
        variant: DecoderVariant::Residual,
        hidden_dims: (32, 16),
        blocks_per_stack: 1,
        seed,
    }
}

// ---------------------------------------------------------------------------
// Criterion 1: scoring exactness + property suite, < 1 s
// ---------------------------------------------------------------------------

#[test]
fn c01_scoring_exactness() {
    let start = Instant::now();

    // (e^2 - e)/(e^2 - 1), to the f64 closest to the true value.
    let expected = 0.731_058_578_630_004_9_f64;
    assert!((rmsd_score(1.0, 2.0).unwrap() - expected).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..200 {
        let m = rng.random_range(0.05..20.0f64);
        assert_eq!(rmsd_score(0.0, m).unwrap(), 1.0);
        assert_eq!(rmsd_score(m, m).unwrap(), 0.0);
    }

    for _ in 0..10_000 {
        let m = rng.random_range(0.05..20.0f64);
        let a = rng.random_range(0.0..1.0f64) * m;
        let b = rng.random_range(0.0..1.0f64) * m;
        let (lo, hi) = (a.min(b), a.max(b));
        if lo < hi {
            assert!(
                rmsd_score(lo, m).unwrap() > rmsd_score(hi, m).unwrap(),
                "monotonicity at ({lo}, {hi}, {m})"
            );
        }

        let rec = PerformanceRecord {
            instance_id: "i".into(),
            algorithm_id: "a".into(),
            rmsd: if rng.random_bool(0.95) {
                Some(rng.random_range(0.0..30.0))
            } else {
                None
            },
            pb_valid: rng.random_bool(0.6),
        };
        let alpha = rng.random_range(0.0..=1.0);
        let additive = ScoreConfig {
            mode: ScoreMode::Additive,
            tolerance_m: m,
            alpha,
        };
        let multiplicative = ScoreConfig {
            mode: ScoreMode::Multiplicative,
            tolerance_m: m,
            alpha,
        };
        for cfg in [&additive, &multiplicative] {
            let s = composite_score(&rec, cfg).unwrap();
            assert!((0.0..=1.0).contains(&s), "range violation: {s}");
        }
        if !rec.pb_valid {
            assert_eq!(composite_score(&rec, &multiplicative).unwrap(), 0.0);
        }
        // Alpha endpoints collapse to the pure component scores.
        if let Some(x) = rec.rmsd {
            let pure_rmsd = ScoreConfig {
                alpha: 1.0,
                ..additive
            };
            let pure_pb = ScoreConfig {
                alpha: 0.0,
                ..additive
            };
            assert_eq!(
                composite_score(&rec, &pure_rmsd).unwrap(),
                rmsd_score(x, m).unwrap()
            );
            assert_eq!(
                composite_score(&rec, &pure_pb).unwrap(),
                pb_score(rec.pb_valid)
            );
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("ACCEPTANCE C1 scoring exactness + 10k property draws ({elapsed:?}): PASS");
}

// ---------------------------------------------------------------------------
// Criterion 2: gradient suite vs central finite differences, < 30 s
// ---------------------------------------------------------------------------

#[test]
fn c02_gradient_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let h = 1e-5;
    let tol = 1e-4;

    for case in 0..100 {
        let m = rng.random_range(2..=8usize);
        let (pred, labels) = random_pred_labels(&mut rng, m);
        let sigma = rng.random_range(0.5..2.0);
        let cfg = LossConfig {
            sigma,
            weight_bce: 1.0,
            weight_pl: 1.0,
            weight_ndcg: 1.0,
        };

        let bce = bce_loss(&pred, &labels).unwrap();
        let fd = fd_grad(|s| bce_loss(s, &labels).unwrap().value, &pred, h);
        assert_rel_close(&bce.grad, &fd, tol, &format!("bce case {case}"));

        let pl = pl_loss(&pred, &labels, &cfg).unwrap();
        let fd = fd_grad(|s| pl_loss(s, &labels, &cfg).unwrap().value, &pred, h);
        assert_rel_close(&pl.grad, &fd, tol, &format!("pl case {case}"));

        // NDCG under the frozen-weight convention: differentiate the oracle
        // with pair weights pinned at the base point.
        let ndcg = ndcg_loss2(&pred, &labels, &cfg).unwrap();
        let (_, _, pairs) = oracle_ndcg(&pred, &labels, sigma);
        let frozen = |s: &[f64]| {
            pairs
                .iter()
                .map(|&(i, j, w)| {
                    let p = 1.0 / (1.0 + (-sigma * (s[i] - s[j])).exp());
                    -w * p.log2()
                })
                .sum::<f64>()
        };
        let fd = fd_grad(frozen, &pred, h);
        assert_rel_close(&ndcg.grad, &fd, tol, &format!("ndcg case {case}"));
    }

    // Full decoder backward, loss-through-network, nets <= 200 parameters.
    for case in 0..100 {
        let spec = ArchitectureSpec {
            input_dim: rng.random_range(2..=4),
            output_dim: rng.random_range(2..=3),
            variant: if case % 2 == 0 {
                DecoderVariant::Residual
            } else {
                DecoderVariant::PlainMlp
            },
            hidden_dims: (rng.random_range(3..=5), rng.random_range(2..=4)),
            blocks_per_stack: 1,
            seed: case,
        };
        let mut params = init_decoder(&spec).unwrap();
        for p in params.as_flat_mut() {
            *p = rng.random_range(-0.6..0.6);
        }
        assert!(params.param_count() <= 200, "net too large");
        let x: Vec<f64> = (0..spec.input_dim)
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        let y: Vec<f64> = (0..spec.output_dim)
            .map(|_| rng.random_range(0.0..=1.0))
            .collect();

        let (scores, cache) = forward(&params, &x).unwrap();
        let loss = bce_loss(&scores, &y).unwrap();
        let analytic = backward(&params, &cache, &loss.grad).unwrap();

        let flat = params.to_flat();
        let spec_clone = spec.clone();
        let through_net = |theta: &[f64]| {
            let p = dockselect::model::DecoderParams::from_flat(spec_clone.clone(), theta.to_vec())
                .unwrap();
            let s = predict(&p, &x).unwrap();
            bce_loss(&s, &y).unwrap().value
        };
        let numeric = fd_grad(through_net, &flat, h);
        assert_rel_close(&analytic, &numeric, tol, &format!("decoder case {case}"));
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}");
    println!("ACCEPTANCE C2 gradient suite, 100 cases per loss + decoder ({elapsed:?}): PASS");
}

// ---------------------------------------------------------------------------
// Criterion 3: ranking-loss equivalence with brute force, 1e-12
// ---------------------------------------------------------------------------

#[test]
fn c03_ranking_loss_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..1000 {
        let m = rng.random_range(2..=5usize);
        let (pred, labels) = random_pred_labels(&mut rng, m);
        let sigma = rng.random_range(0.5..2.0);
        let cfg = LossConfig {
            sigma,
            weight_bce: 0.0,
            weight_pl: 1.0,
            weight_ndcg: 1.0,
        };

        let pl = pl_loss(&pred, &labels, &cfg).unwrap();
        let (pl_value, pl_grad) = oracle_pl(&pred, &labels, sigma);
        assert!((pl.value - pl_value).abs() < 1e-12);
        for (a, b) in pl.grad.iter().zip(&pl_grad) {
            assert!((a - b).abs() < 1e-12);
        }

        let ndcg = ndcg_loss2(&pred, &labels, &cfg).unwrap();
        let (ndcg_value, ndcg_grad, _) = oracle_ndcg(&pred, &labels, sigma);
        assert!((ndcg.value - ndcg_value).abs() < 1e-12);
        for (a, b) in ndcg.grad.iter().zip(&ndcg_grad) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    println!("ACCEPTANCE C3 ranking losses equal brute-force enumeration (1000 cases): PASS");
}

// ---------------------------------------------------------------------------
// Criterion 4: planted recovery under 10-fold CV, < 5 min
// ---------------------------------------------------------------------------

#[test]
fn c04_planted_recovery() {
    let start = Instant::now();
    let synth = generate_synthetic(&SynthSpec::new(
        SynthRegime::PlantedSeparable,
        2000,
        16,
        4,
        404,
    ))
    .unwrap();
    let ds = &synth.dataset;
    let train_cfg = TrainConfig {
        epochs: 30,
        learning_rate: 1e-2,
        batch_size: 32,
        seed: 404,
        ..TrainConfig::default()
    };
    let report = cross_validate(
        &eval_data(ds),
        &ScoreConfig::default(),
        &small_arch(16, 4, 404),
        &train_cfg,
        &canonical_metrics(),
        10,
        404,
    )
    .unwrap();

    for summary in &report.metrics {
        let gap = summary.vbs_mean - summary.selector_mean;
        assert!(
            gap <= 0.05,
            "selector trails VBS by {gap} on {}",
            summary.metric.label()
        );
        assert!(
            summary.selector_mean > summary.sbs_mean,
            "selector {} not above SBS {}",
            summary.selector_mean,
            summary.sbs_mean
        );
        let p = summary.p_selector_vs_sbs.unwrap();
        assert!(p < 0.05, "p vs SBS = {p}");
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    println!(
        "ACCEPTANCE C4 planted recovery: selector within 5 pts of VBS, above SBS, p<0.05 \
         ({elapsed:?}): PASS"
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: no false complementarity on dominant-algorithm data
// ---------------------------------------------------------------------------

#[test]
fn c05_degenerate_sanity() {
    let synth = generate_synthetic(&SynthSpec::new(
        SynthRegime::DominantAlgorithm,
        600,
        8,
        4,
        505,
    ))
    .unwrap();
    let ds = &synth.dataset;
    let train_cfg = TrainConfig {
        epochs: 30,
        learning_rate: 1e-2,
        batch_size: 32,
        seed: 505,
        ..TrainConfig::default()
    };
    let report = cross_validate(
        &eval_data(ds),
        &ScoreConfig::default(),
        &small_arch(8, 4, 505),
        &train_cfg,
        &canonical_metrics(),
        10,
        505,
    )
    .unwrap();

    for summary in &report.metrics {
        let gap = (summary.selector_mean - summary.sbs_mean).abs();
        assert!(
            gap <= 0.02,
            "selector strays {gap} from SBS on {}",
            summary.metric.label()
        );
    }
    println!("ACCEPTANCE C5 dominant-algorithm data: selector within 2 pts of SBS: PASS");
}

// ---------------------------------------------------------------------------
// Criterion 6: ablation grid shape via the CLI, deterministic per seed
// ---------------------------------------------------------------------------

#[test]
fn c06_ablation_table_shape() {
    let bin = env!("CARGO_BIN_EXE_dockselect");
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = std::process::Command::new(bin)
            .args(args)
            .current_dir(dir.path())
            .output()
            .expect("spawn dockselect");
        assert!(
            out.status.success(),
            "command failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };

    run(&[
        "synth",
        "--regime",
        "complementary",
        "--n",
        "80",
        "--d",
        "4",
        "--m",
        "3",
        "--seed",
        "606",
        "--out",
        "data",
    ]);
    let cfg_path = dir.path().join("small.toml");
    std::fs::write(
        &cfg_path,
        "[model]\nhidden_dims = [8, 4]\nblocks_per_stack = 1\n[train]\nepochs = 5\n",
    )
    .unwrap();
    let ln11 = format!("{LN_11}");
    let m_values = format!("1,2,{ln11},3,5");
    for out_dir in ["grid_a", "grid_b"] {
        run(&[
            "ablate",
            "--config",
            cfg_path.to_str().unwrap(),
            "--features",
            "data/features.csv",
            "--performance",
            "data/performance.csv",
            "--m-values",
            &m_values,
            "--alpha-values",
            "0.1,0.3,0.5,0.7,0.9",
            "--seed",
            "606",
            "--out",
            out_dir,
        ]);
    }

    for grid in ["ablation_rmsd1.csv", "ablation_rmsd2.csv"] {
        let a = std::fs::read(dir.path().join("grid_a").join(grid)).unwrap();
        let b = std::fs::read(dir.path().join("grid_b").join(grid)).unwrap();
        assert_eq!(a, b, "{grid} not deterministic");

        let text = String::from_utf8(a).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(
            header,
            "M,alpha_0.1,alpha_0.3,alpha_0.5,alpha_0.7,alpha_0.9,s_mul"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 5, "expected 5 tolerance rows");
        for row in rows {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields.len(), 7, "expected M + 6 columns");
            for cell in &fields[1..] {
                let v: f64 = cell.parse().unwrap();
                assert!((0.0..=100.0).contains(&v), "cell {v} out of range");
            }
        }
    }
    println!("ACCEPTANCE C6 ablation emits two deterministic 5x6 grids: PASS");
}

// ---------------------------------------------------------------------------
// Criterion 7: protocol fidelity (folds, SBS isolation, VBS dominance)
// ---------------------------------------------------------------------------

#[test]
fn c07_protocol_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);

    // Randomized k-fold sweep: partition property + determinism.
    for _ in 0..100 {
        let n = rng.random_range(4..200usize);
        let k = rng.random_range(2..=n.min(15));
        let seed = rng.random_range(0..u64::MAX);
        let ids: Vec<String> = (0..n).map(|i| format!("i{i:04}")).collect();
        let plan = kfold_split(&ids, k, seed).unwrap();
        let sizes = plan.fold_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), n);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert_eq!(plan.assignments.len(), n);
        assert_eq!(kfold_split(&ids, k, seed).unwrap(), plan);
    }

    // SBS is a function of the train slice alone.
    let labels = dockselect::scoring::LabelMatrix {
        scores: vec![
            vec![0.9, 0.1],
            vec![0.8, 0.3],
            vec![0.1, 0.2],
            vec![0.0, 1.0],
        ],
        instance_ids: (0..4).map(|i| format!("i{i}")).collect(),
        algorithm_ids: vec!["p".into(), "q".into()],
    };
    let train_slice = labels.select_rows(&[0, 1]);
    let sbs_before = sbs_algorithm(&train_slice).unwrap();
    let mut tampered = labels.clone();
    tampered.scores[2] = vec![0.0, 9.0];
    tampered.scores[3] = vec![0.0, 9.0];
    assert_eq!(
        sbs_algorithm(&tampered.select_rows(&[0, 1])).unwrap(),
        sbs_before,
        "test rows leaked into SBS"
    );

    // VBS dominance on every generated dataset, all regimes.
    let metrics = canonical_metrics();
    for (regime, seed) in [
        (SynthRegime::PlantedSeparable, 1u64),
        (SynthRegime::DominantAlgorithm, 2),
        (SynthRegime::NoisyComplementary, 3),
        (SynthRegime::NoisyComplementary, 4),
    ] {
        let mut spec = SynthSpec::new(regime, 150, 4, 4, seed);
        spec.noise_level = 0.3;
        spec.pb_fail_rate = vec![0.0, 0.2, 0.1, 0.3];
        let synth = generate_synthetic(&spec).unwrap();
        let ds = &synth.dataset;
        let labels = ds.label_matrix(&ScoreConfig::default()).unwrap();
        let vbs = vbs_selection(&labels);
        for spec in &metrics {
            let vbs_rate = gated_success(&vbs, &ds.table, spec);
            for algo in &ds.portfolio {
                let fixed: Selections = ds
                    .instance_ids
                    .iter()
                    .map(|id| (id.clone(), algo.clone()))
                    .collect();
                let rate = gated_success(&fixed, &ds.table, spec);
                assert!(
                    vbs_rate >= rate,
                    "{regime:?}: VBS {vbs_rate} below {algo} {rate}"
                );
            }
        }
    }
    println!("ACCEPTANCE C7 protocol fidelity (folds, SBS isolation, VBS dominance): PASS");
}

// ---------------------------------------------------------------------------
// Criterion 8: exact Wilcoxon values and symmetry
// ---------------------------------------------------------------------------

#[test]
fn c08_statistics() {
    let a: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
    let b: Vec<f64> = (0..10).map(|i| i as f64 * 0.5).collect();
    let p = wilcoxon_signed_rank(&a, &b).unwrap();
    assert!(
        (p - 2.0 / 1024.0).abs() < 1e-12,
        "all-positive n=10 gave {p}"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..1000 {
        let n = rng.random_range(5..=30usize);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                if rng.random_bool(0.15) {
                    x[i]
                } else {
                    rng.random_range(-4.0..4.0)
                }
            })
            .collect();
        let p_xy = wilcoxon_signed_rank(&x, &y).unwrap();
        let p_yx = wilcoxon_signed_rank(&y, &x).unwrap();
        assert!((p_xy - p_yx).abs() < 1e-12, "asymmetry: {p_xy} vs {p_yx}");
        assert!(p_xy > 0.0 && p_xy <= 1.0);
    }
    println!("ACCEPTANCE C8 exact Wilcoxon tail + symmetry over 1000 samples: PASS");
}

// ---------------------------------------------------------------------------
// Criterion 9: byte-identical reports, bit-exact checkpoints
// ---------------------------------------------------------------------------

#[test]
fn c09_reproducibility_and_persistence() {
    let synth = generate_synthetic(&SynthSpec::new(
        SynthRegime::NoisyComplementary,
        60,
        4,
        3,
        909,
    ))
    .unwrap();
    let ds = &synth.dataset;
    let train_cfg = TrainConfig {
        epochs: 8,
        learning_rate: 1e-2,
        batch_size: 16,
        seed: 909,
        ..TrainConfig::default()
    };
    let run = || {
        cross_validate(
            &eval_data(ds),
            &ScoreConfig::default(),
            &small_arch(4, 3, 909),
            &train_cfg,
            &canonical_metrics(),
            6,
            909,
        )
        .unwrap()
    };
    let dir = tempfile::tempdir().unwrap();
    let path_a = dir.path().join("a.json");
    let path_b = dir.path().join("b.json");
    save_report(&path_a, &run()).unwrap();
    save_report(&path_b, &run()).unwrap();
    assert_eq!(
        std::fs::read(&path_a).unwrap(),
        std::fs::read(&path_b).unwrap(),
        "report.json not byte-identical across reruns"
    );

    // Checkpoint round trip: identical predictions on 100 random inputs.
    let spec = small_arch(6, 4, 99);
    let params = init_decoder(&spec).unwrap();
    let scaler = Scaler {
        mean: vec![0.1; 6],
        std: vec![1.5; 6],
    };
    let ckpt = Checkpoint::new(
        params,
        (0..4).map(|j| format!("algo_{j}")).collect(),
        Some(scaler),
    )
    .unwrap();
    let ckpt_path = dir.path().join("model.ckpt");
    save_checkpoint(&ckpt_path, &ckpt).unwrap();
    let loaded = load_checkpoint(&ckpt_path).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(910);
    for _ in 0..100 {
        let x: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let before = ckpt.predict(&x).unwrap();
        let after = loaded.predict(&x).unwrap();
        assert_eq!(before, after, "prediction changed across save/load");
    }
    println!("ACCEPTANCE C9 byte-identical reports + bit-exact checkpoint round trip: PASS");
}

// ---------------------------------------------------------------------------
// Criterion 10: selection-frequency format
// ---------------------------------------------------------------------------

#[test]
fn c10_selection_frequency_format() {
    // Frequencies from a real run sum to the test-instance count.
    let synth = generate_synthetic(&SynthSpec::new(
        SynthRegime::PlantedSeparable,
        90,
        4,
        3,
        1010,
    ))
    .unwrap();
    let ds = &synth.dataset;
    let train_cfg = TrainConfig {
        epochs: 10,
        learning_rate: 1e-2,
        batch_size: 16,
        seed: 1010,
        ..TrainConfig::default()
    };
    let report = cross_validate(
        &eval_data(ds),
        &ScoreConfig::default(),
        &small_arch(4, 3, 1010),
        &train_cfg,
        &canonical_metrics(),
        6,
        1010,
    )
    .unwrap();
    assert_eq!(report.selector_frequencies.iter().sum::<u64>(), 90);
    assert_eq!(report.vbs_frequencies.iter().sum::<u64>(), 90);
    assert_eq!(report.selector_frequencies.len(), ds.portfolio.len());

    // Renderer: one count per algorithm, zeros included; the fixture totals
    // 3179, the documented reporting reference.
    let portfolio: Vec<String> = (0..8).map(|j| format!("tool_{j}")).collect();
    let vbs_counts = [892u64, 1222, 225, 354, 139, 209, 118, 20];
    assert_eq!(vbs_counts.iter().sum::<u64>(), 3179);
    let selector_counts = [1806u64, 696, 420, 168, 54, 28, 4, 0];
    let rendered = render_frequencies(&portfolio, &selector_counts, &vbs_counts);
    for algo in &portfolio {
        assert!(
            rendered.lines().any(|l| l.starts_with(algo.as_str())),
            "{algo} missing from frequency table"
        );
    }
    assert!(rendered.contains("3179"));
    let zero_line = rendered.lines().find(|l| l.starts_with("tool_7")).unwrap();
    assert!(zero_line.split_whitespace().any(|t| t == "0"));

    // Label-argmax frequencies on a hand matrix, zeros included.
    let labels = dockselect::scoring::LabelMatrix {
        scores: vec![vec![0.1, 0.9, 0.3]; 3],
        instance_ids: (0..3).map(|i| format!("i{i}")).collect(),
        algorithm_ids: (0..3).map(|j| format!("a{j}")).collect(),
    };
    let counts = selection_frequencies(&vbs_selection(&labels), &labels.algorithm_ids);
    assert_eq!(counts, vec![0, 3, 0]);

    println!("ACCEPTANCE C10 frequency totals + per-algorithm rendering: PASS");
}

// ---------------------------------------------------------------------------
// Composite-loss wiring sanity used by several criteria above
// ---------------------------------------------------------------------------

#[test]
fn composite_weights_are_linear() {
    let pred = [0.3, -0.7, 1.2];
    let labels = [1.0, 0.0, 0.5];
    let bce_only = LossConfig {
        sigma: 1.0,
        weight_bce: 1.0,
        weight_pl: 0.0,
        weight_ndcg: 0.0,
    };
    let all = LossConfig {
        sigma: 1.0,
        weight_bce: 1.0,
        weight_pl: 2.0,
        weight_ndcg: 3.0,
    };
    let combined = composite_loss(&pred, &labels, &all).unwrap();
    let expected = bce_loss(&pred, &labels).unwrap().value
        + 2.0 * pl_loss(&pred, &labels, &bce_only).unwrap().value
        + 3.0 * ndcg_loss2(&pred, &labels, &bce_only).unwrap().value;
    assert!((combined.value - expected).abs() < 1e-12);
}

#[test]
fn label_matrix_matches_per_record_scoring() {
    let records = vec![
        PerformanceRecord {
            instance_id: "b".into(),
            algorithm_id: "y".into(),
            rmsd: Some(1.2),
            pb_valid: true,
        },
        PerformanceRecord {
            instance_id: "a".into(),
            algorithm_id: "x".into(),
            rmsd: Some(0.3),
            pb_valid: true,
        },
        PerformanceRecord {
            instance_id: "a".into(),
            algorithm_id: "y".into(),
            rmsd: Some(2.5),
            pb_valid: false,
        },
    ];
    let portfolio = vec!["x".to_string(), "y".to_string()];
    let cfg = ScoreConfig::default();
    let labels = build_label_matrix(&records, &portfolio, &cfg).unwrap();
    assert_eq!(labels.instance_ids, vec!["a", "b"]);
    for rec in &records {
        let i = labels.instance_index(&rec.instance_id).unwrap();
        let j = portfolio
            .iter()
            .position(|a| *a == rec.algorithm_id)
            .unwrap();
        assert_eq!(labels.scores[i][j], composite_score(rec, &cfg).unwrap());
    }
    assert_eq!(labels.scores[1][0], 0.0); // no record for (b, x)
}
