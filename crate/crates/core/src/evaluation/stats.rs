//! Paired significance tests over per-fold metric values.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Largest sample size for which the Wilcoxon null distribution is
/// enumerated exactly; larger samples use the tie-corrected normal
/// approximation with continuity correction.
pub const EXACT_WILCOXON_MAX_N: usize = 25;

fn paired_differences(sample_a: &[f64], sample_b: &[f64]) -> Result<Vec<f64>> {
    if sample_a.len() != sample_b.len() {
        return Err(Error::ShapeMismatch(format!(
            "paired samples differ in length: {} vs {}",
            sample_a.len(),
            sample_b.len()
        )));
    }
    if sample_a.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "paired tests need at least 5 pairs, got {}",
            sample_a.len()
        )));
    }
    Ok(sample_a.iter().zip(sample_b).map(|(a, b)| a - b).collect())
}

/// Average ranks of `|values|` ascending, ties sharing their mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]].abs() == values[order[i]].abs() {
            j += 1;
        }
        // Positions i..=j (0-based) share ranks i+1..=j+1.
        let shared = (i + 1 + j + 1) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped; if none remain the samples are
/// indistinguishable and `p = 1` by convention. For up to
/// [`EXACT_WILCOXON_MAX_N`] nonzero differences the p-value is exact,
/// computed from the full sign-flip distribution of the rank sum (average
/// ranks for tied magnitudes, doubled one-sided tail capped at 1).
pub fn wilcoxon_signed_rank(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    let diffs: Vec<f64> = paired_differences(sample_a, sample_b)?
        .into_iter()
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(1.0);
    }
    let ranks = average_ranks(&diffs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    if n <= EXACT_WILCOXON_MAX_N {
        Ok(exact_two_sided_p(&ranks, w_plus))
    } else {
        Ok(normal_two_sided_p(&diffs, w_plus))
    }
}

/// Exact two-sided p via the subset-sum distribution of the positive rank
/// sum. Average ranks are half-integers, so doubling them makes every rank
/// an exact integer weight.
fn exact_two_sided_p(ranks: &[f64], w_plus: f64) -> f64 {
    let weights: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = weights.iter().sum();
    let mut counts = vec![0u128; total + 1];
    counts[0] = 1;
    for &w in &weights {
        for s in (w..=total).rev() {
            counts[s] += counts[s - w];
        }
    }
    let observed = (2.0 * w_plus).round() as usize;
    let denom = 2f64.powi(ranks.len() as i32);
    let cdf: u128 = counts[..=observed].iter().sum();
    let sf: u128 = counts[observed..].iter().sum();
    let one_sided = (cdf as f64 / denom).min(sf as f64 / denom);
    (2.0 * one_sided).min(1.0)
}

/// Normal approximation with tie correction and continuity correction.
fn normal_two_sided_p(diffs: &[f64], w_plus: f64) -> f64 {
    let n = diffs.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    // Ties: group by magnitude, subtract sum(t^3 - t)/48.
    let mut sorted: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        variance -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    if variance <= 0.0 {
        return 1.0;
    }
    let delta = w_plus - mean;
    let z = (delta - 0.5 * delta.signum()) / variance.sqrt();
    if delta == 0.0 {
        return 1.0;
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Two-sided paired Student t-test, the parametric alternative.
pub fn paired_t_test(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    let diffs = paired_differences(sample_a, sample_b)?;
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Ok(if mean == 0.0 { 1.0 } else { f64::MIN_POSITIVE });
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0)
        .map_err(|e| Error::Internal(format!("t distribution: {e}")))?;
    Ok((2.0 * (1.0 - dist.cdf(t.abs()))).clamp(f64::MIN_POSITIVE, 1.0))
}
