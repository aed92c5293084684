//! Evaluation reports: structured results, JSON persistence, and the
//! human-readable table renderer.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{wilcoxon_signed_rank, GatedMetricSpec};
use crate::scoring::ScoreConfig;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Run provenance embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub k: usize,
    pub seed: u64,
    pub n_instances: usize,
    pub portfolio: Vec<String>,
    pub score: ScoreConfig,
}

/// Gated rates of one fold under one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetricRates {
    pub metric: GatedMetricSpec,
    pub selector: f64,
    pub sbs: f64,
    pub vbs: f64,
    /// Constant-selection rate per portfolio algorithm.
    pub per_algorithm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub test_size: usize,
    /// Single best solver chosen from this fold's training split.
    pub sbs_algorithm: String,
    pub rates: Vec<FoldMetricRates>,
}

/// Cross-fold aggregates for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: GatedMetricSpec,
    pub selector_mean: f64,
    pub sbs_mean: f64,
    pub vbs_mean: f64,
    /// Absolute gain of the selector over SBS.
    pub delta_vs_sbs: f64,
    /// Wilcoxon signed-rank p-value of selector vs SBS across folds
    /// (absent below 5 folds).
    pub p_selector_vs_sbs: Option<f64>,
    /// Wilcoxon p-value against another run's selector (see
    /// [`attach_baseline`]).
    pub p_vs_baseline: Option<f64>,
    /// Per-algorithm gated rates pooled over the union of test folds.
    pub standalone_rates: Vec<f64>,
}

/// Complete cross-validation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub metadata: ReportMetadata,
    pub metrics: Vec<MetricSummary>,
    pub folds: Vec<FoldReport>,
    /// Trained-selector picks per algorithm, summed over all test folds.
    pub selector_frequencies: Vec<u64>,
    /// Label-argmax (VBS) picks per algorithm over the same folds.
    pub vbs_frequencies: Vec<u64>,
}

pub fn save_report(path: &Path, report: &EvalReport) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Internal(format!("report serialization: {e}")))?;
    json.push('\n');
    fs::write(path, json)?;
    Ok(())
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

pub fn load_report(path: &Path) -> Result<EvalReport> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let probe: VersionProbe = serde_json::from_str(&text)
        .map_err(|e| Error::parse(&display, e.line() as u64, e.to_string()))?;
    if probe.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Version {
            expected: REPORT_SCHEMA_VERSION,
            found: probe.schema_version,
        });
    }
    serde_json::from_str(&text).map_err(|e| Error::parse(&display, e.line() as u64, e.to_string()))
}

/// Fills `p_vs_baseline` by pairing per-fold selector rates against another
/// run of the same protocol (same k, same metrics) — the usual way to test a
/// ranking-loss variant against its BCE baseline.
pub fn attach_baseline(report: &mut EvalReport, baseline: &EvalReport) -> Result<()> {
    if report.folds.len() != baseline.folds.len() {
        return Err(Error::ShapeMismatch(format!(
            "fold counts differ: {} vs {}",
            report.folds.len(),
            baseline.folds.len()
        )));
    }
    let metrics_a: Vec<GatedMetricSpec> = report.metrics.iter().map(|s| s.metric).collect();
    let metrics_b: Vec<GatedMetricSpec> = baseline.metrics.iter().map(|s| s.metric).collect();
    if metrics_a != metrics_b {
        return Err(Error::Schema(
            "reports were produced with different gated metrics".into(),
        ));
    }
    for (mi, summary) in report.metrics.iter_mut().enumerate() {
        let ours: Vec<f64> = report.folds.iter().map(|f| f.rates[mi].selector).collect();
        let theirs: Vec<f64> = baseline
            .folds
            .iter()
            .map(|f| f.rates[mi].selector)
            .collect();
        summary.p_vs_baseline = Some(wilcoxon_signed_rank(&ours, &theirs)?);
    }
    Ok(())
}

fn pct(rate: f64) -> String {
    format!("{:.1}", rate * 100.0)
}

/// Renders the aggregate table (method rows, Abs and delta per metric, with
/// a `*` marking p < 0.05 vs SBS) followed by the selection-frequency block.
pub fn render_report(report: &EvalReport) -> String {
    let mut out = String::new();
    let metrics = &report.metrics;
    writeln!(
        out,
        "Gated success over {}-fold cross-validation (values in %, fold-averaged; \
         standalone rows pooled over test folds)",
        report.metadata.k
    )
    .unwrap();

    let method_w = report
        .metadata
        .portfolio
        .iter()
        .map(|a| a.len())
        .chain([24])
        .max()
        .unwrap()
        + 2;
    let group_w = 24;

    let mut header = format!("{:<method_w$}", "Method");
    let mut subheader = format!("{:<method_w$}", "");
    for s in metrics {
        header.push_str(&format!("| {:^group_w$} ", s.metric.label()));
        subheader.push_str(&format!("| {:>10} {:>11}  ", "Abs", "Delta"));
    }
    writeln!(out, "{header}").unwrap();
    writeln!(out, "{subheader}").unwrap();
    let rule_len = method_w + metrics.len() * (group_w + 3);
    writeln!(out, "{}", "-".repeat(rule_len)).unwrap();

    // Standalone algorithms.
    for (j, algo) in report.metadata.portfolio.iter().enumerate() {
        let mut row = format!("{algo:<method_w$}");
        for s in metrics {
            row.push_str(&format!(
                "| {:>10} {:>11}  ",
                pct(s.standalone_rates[j]),
                "--"
            ));
        }
        writeln!(out, "{row}").unwrap();
    }
    writeln!(out, "{}", "-".repeat(rule_len)).unwrap();

    // SBS row: name it when every fold agrees.
    let sbs_names: Vec<&str> = report
        .folds
        .iter()
        .map(|f| f.sbs_algorithm.as_str())
        .collect();
    let sbs_label = if sbs_names.windows(2).all(|w| w[0] == w[1]) {
        format!("SBS ({})", sbs_names.first().copied().unwrap_or("none"))
    } else {
        "SBS (per-fold)".to_string()
    };
    let mut row = format!("{sbs_label:<method_w$}");
    for s in metrics {
        row.push_str(&format!("| {:>10} {:>11}  ", pct(s.sbs_mean), "--"));
    }
    writeln!(out, "{row}").unwrap();

    let mut row = format!("{:<method_w$}", "VBS (oracle)");
    for s in metrics {
        row.push_str(&format!("| {:>10} {:>11}  ", pct(s.vbs_mean), "--"));
    }
    writeln!(out, "{row}").unwrap();

    let mut row = format!("{:<method_w$}", "selector");
    for s in metrics {
        let star = match s.p_selector_vs_sbs {
            Some(p) if p < 0.05 => "*",
            _ => "",
        };
        let delta = format!("{:+.1}{star}", s.delta_vs_sbs * 100.0);
        row.push_str(&format!("| {:>10} {delta:>11}  ", pct(s.selector_mean)));
    }
    writeln!(out, "{row}").unwrap();

    for s in metrics {
        if let Some(p) = s.p_selector_vs_sbs {
            writeln!(out, "p vs SBS [{}]: {p:.6}", s.metric.label()).unwrap();
        }
        if let Some(p) = s.p_vs_baseline {
            writeln!(out, "p vs baseline [{}]: {p:.6}", s.metric.label()).unwrap();
        }
    }

    out.push('\n');
    out.push_str(&render_frequencies(
        &report.metadata.portfolio,
        &report.selector_frequencies,
        &report.vbs_frequencies,
    ));
    out
}

/// One line per portfolio algorithm (zeros included) plus totals.
pub fn render_frequencies(portfolio: &[String], selector: &[u64], vbs: &[u64]) -> String {
    let name_w = portfolio.iter().map(|a| a.len()).chain([12]).max().unwrap() + 2;
    let mut out = String::from("Selection frequencies over all test folds\n");
    writeln!(
        out,
        "{:<name_w$}{:>10} {:>10}",
        "algorithm", "selector", "VBS"
    )
    .unwrap();
    for (j, algo) in portfolio.iter().enumerate() {
        writeln!(out, "{algo:<name_w$}{:>10} {:>10}", selector[j], vbs[j]).unwrap();
    }
    writeln!(
        out,
        "{:<name_w$}{:>10} {:>10}",
        "total",
        selector.iter().sum::<u64>(),
        vbs.iter().sum::<u64>()
    )
    .unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::ScoreMode;

    fn sample_report() -> EvalReport {
        let metric1 = GatedMetricSpec {
            rmsd_threshold: 1.0,
            require_pb_valid: true,
        };
        let metric2 = GatedMetricSpec {
            rmsd_threshold: 2.0,
            require_pb_valid: true,
        };
        let portfolio: Vec<String> = (0..8).map(|j| format!("algo_{j:04}")).collect();
        let folds: Vec<FoldReport> = (0..10)
            .map(|f| FoldReport {
                fold: f,
                test_size: 318,
                sbs_algorithm: "algo_0000".into(),
                rates: vec![
                    FoldMetricRates {
                        metric: metric1,
                        selector: 0.48 + f as f64 * 0.001,
                        sbs: 0.43,
                        vbs: 0.62,
                        per_algorithm: vec![0.43, 0.39, 0.24, 0.25, 0.1, 0.24, 0.09, 0.03],
                    },
                    FoldMetricRates {
                        metric: metric2,
                        selector: 0.71 + f as f64 * 0.001,
                        sbs: 0.68,
                        vbs: 0.8,
                        per_algorithm: vec![0.68, 0.54, 0.39, 0.43, 0.15, 0.38, 0.11, 0.09],
                    },
                ],
            })
            .collect();
        EvalReport {
            schema_version: REPORT_SCHEMA_VERSION,
            metadata: ReportMetadata {
                k: 10,
                seed: 7,
                n_instances: 3179,
                portfolio,
                score: ScoreConfig {
                    mode: ScoreMode::Multiplicative,
                    tolerance_m: crate::scoring::LN_11,
                    alpha: 0.5,
                },
            },
            metrics: vec![
                MetricSummary {
                    metric: metric1,
                    selector_mean: 0.484,
                    sbs_mean: 0.43,
                    vbs_mean: 0.62,
                    delta_vs_sbs: 0.054,
                    p_selector_vs_sbs: Some(2.0 / 1024.0),
                    p_vs_baseline: None,
                    standalone_rates: vec![0.43, 0.39, 0.24, 0.25, 0.1, 0.24, 0.09, 0.03],
                },
                MetricSummary {
                    metric: metric2,
                    selector_mean: 0.7145,
                    sbs_mean: 0.68,
                    vbs_mean: 0.8,
                    delta_vs_sbs: 0.0345,
                    p_selector_vs_sbs: Some(2.0 / 1024.0),
                    p_vs_baseline: None,
                    standalone_rates: vec![0.68, 0.54, 0.39, 0.43, 0.15, 0.38, 0.11, 0.09],
                },
            ],
            folds,
            // The VBS column mirrors a published frequency profile whose
            // total (3179) the format test pins down.
            selector_frequencies: vec![1806, 696, 420, 168, 54, 28, 4, 3],
            vbs_frequencies: vec![892, 1222, 225, 354, 139, 209, 118, 20],
        }
    }

    #[test]
    fn save_load_round_trip_and_byte_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("a.json");
        let path_b = dir.path().join("b.json");
        let report = sample_report();
        save_report(&path_a, &report).unwrap();
        save_report(&path_b, &report).unwrap();
        assert_eq!(fs::read(&path_a).unwrap(), fs::read(&path_b).unwrap());
        let loaded = load_report(&path_a).unwrap();
        assert_eq!(loaded, report);
    }

    #[test]
    fn version_mismatch_names_both_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let mut report = sample_report();
        report.schema_version = 99;
        save_report(&path, &report).unwrap();
        match load_report(&path) {
            Err(Error::Version { expected, found }) => {
                assert_eq!(expected, REPORT_SCHEMA_VERSION);
                assert_eq!(found, 99);
            }
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_report_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        save_report(&path, &sample_report()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_report(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn renderer_lists_every_algorithm_and_totals() {
        let report = sample_report();
        let rendered = render_report(&report);
        for algo in &report.metadata.portfolio {
            assert!(
                rendered.matches(algo.as_str()).count() >= 2,
                "{algo} should appear in the table and the frequency block"
            );
        }
        assert!(rendered.contains("3179"), "frequency totals missing");
        assert!(rendered.contains("SBS (algo_0000)"));
        assert!(rendered.contains("VBS (oracle)"));
        assert!(
            rendered.contains('*'),
            "significant delta should be starred"
        );
        assert!(rendered.contains("48.4")); // selector mean, one decimal
    }

    #[test]
    fn zero_count_algorithms_still_render() {
        let portfolio = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let rendered = render_frequencies(&portfolio, &[0, 0, 3], &[1, 0, 2]);
        assert!(rendered.lines().count() >= 5);
        for algo in &portfolio {
            assert!(rendered.lines().any(|l| l.starts_with(algo.as_str())));
        }
    }

    #[test]
    fn attach_baseline_fills_p_values() {
        let mut report = sample_report();
        let mut baseline = sample_report();
        // Degrade the baseline selector so the comparison is one-sided.
        for f in &mut baseline.folds {
            for r in &mut f.rates {
                r.selector -= 0.05;
            }
        }
        attach_baseline(&mut report, &baseline).unwrap();
        for s in &report.metrics {
            let p = s.p_vs_baseline.unwrap();
            assert!((p - 2.0 / 1024.0).abs() < 1e-12, "p = {p}");
        }

        let mut short = sample_report();
        short.folds.truncate(4);
        assert!(attach_baseline(&mut report, &short).is_err());
    }
}
