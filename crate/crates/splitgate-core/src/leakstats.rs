//! Random-label leakage statistics.
//!
//! A Monte-Carlo null distribution of the multiclass MCC under independent
//! uniform labels and predictions, a one-sample two-tailed Wilcoxon
//! signed-rank test, and an empirical percentile p-value. An observed MCC
//! that is statistically extreme against the null is a leakage signal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{confusion_matrix, mcc_multiclass};
use crate::rng::{derive_seed, SplitRng};

/// MCC samples under the no-association hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub samples: Vec<f64>,
    pub iters: usize,
    pub n_test: usize,
    /// Aggregate truth-label tallies over all iterations; length is the
    /// class count.
    pub class_counts: Vec<u64>,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum LeakError {
    #[error("need n_test >= k >= 2 and iters >= 1, got n_test={n_test}, k={k}, iters={iters}")]
    BadDimensions {
        n_test: usize,
        k: usize,
        iters: usize,
    },
    #[error("the sample is empty")]
    EmptySample,
    #[error("alpha {alpha} is outside (0, 1)")]
    InvalidAlpha { alpha: f64 },
}

/// Draw `iters` MCC values of random truth against random prediction.
///
/// Each iteration uses an independently derived seed, so results do not
/// depend on scheduling; truth labels are drawn before predictions.
pub fn sample_null_mcc(
    n_test: usize,
    k: usize,
    iters: usize,
    seed: u64,
) -> Result<NullDistribution, LeakError> {
    if k < 2 || n_test < k || iters < 1 {
        return Err(LeakError::BadDimensions { n_test, k, iters });
    }
    let draws: Vec<(f64, Vec<u64>)> = (0..iters)
        .into_par_iter()
        .map(|i| {
            let mut rng = SplitRng::from_seed(derive_seed(seed, i as u64));
            let truth: Vec<usize> = (0..n_test).map(|_| rng.next_below(k as u64) as usize).collect();
            let pred: Vec<usize> = (0..n_test).map(|_| rng.next_below(k as u64) as usize).collect();
            let cm = confusion_matrix(&truth, &pred, k).expect("labels in range");
            let mcc = mcc_multiclass(&cm).expect("n_test >= 1");
            (mcc, cm.truth_totals())
        })
        .collect();

    let mut samples = Vec::with_capacity(iters);
    let mut class_counts = vec![0u64; k];
    for (mcc, totals) in draws {
        samples.push(mcc);
        for (acc, t) in class_counts.iter_mut().zip(totals) {
            *acc += t;
        }
    }
    Ok(NullDistribution {
        samples,
        iters,
        n_test,
        class_counts,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonMethod {
    /// Exact for n up to 12 after zero-dropping, normal beyond.
    Auto,
    Exact,
    Normal,
}

/// Signed ranks in doubled units so that tied average ranks stay integral.
struct RankedDiffs {
    /// Doubled rank and sign of each nonzero difference.
    doubled: Vec<(u64, bool)>,
    /// Run lengths of tied absolute differences.
    tie_runs: Vec<usize>,
}

fn rank_diffs(sample: &[f64], m0: f64) -> RankedDiffs {
    let mut abs_diffs: Vec<(f64, bool)> = sample
        .iter()
        .map(|x| x - m0)
        .filter(|d| *d != 0.0)
        .map(|d| (d.abs(), d > 0.0))
        .collect();
    abs_diffs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite differences"));
    let mut doubled = Vec::with_capacity(abs_diffs.len());
    let mut tie_runs = Vec::new();
    let mut i = 0;
    while i < abs_diffs.len() {
        let mut j = i;
        while j < abs_diffs.len() && abs_diffs[j].0 == abs_diffs[i].0 {
            j += 1;
        }
        // ranks i+1..=j share the average (i+1+j)/2; doubled keeps integers
        let doubled_rank = (i + 1 + j) as u64;
        for item in &abs_diffs[i..j] {
            doubled.push((doubled_rank, item.1));
        }
        tie_runs.push(j - i);
        i = j;
    }
    RankedDiffs { doubled, tie_runs }
}

fn exact_p(ranks: &RankedDiffs) -> f64 {
    let n = ranks.doubled.len();
    let s2: u64 = ranks.doubled.iter().map(|(r, _)| r).sum();
    let w2_obs: u64 = ranks
        .doubled
        .iter()
        .filter(|(_, positive)| *positive)
        .map(|(r, _)| r)
        .sum();
    let observed = (2 * w2_obs as i64 - s2 as i64).unsigned_abs();
    let mut extreme = 0u64;
    for mask in 0u64..(1u64 << n) {
        let w2: u64 = ranks
            .doubled
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, (r, _))| r)
            .sum();
        if (2 * w2 as i64 - s2 as i64).unsigned_abs() >= observed {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

fn normal_p(ranks: &RankedDiffs) -> f64 {
    let n = ranks.doubled.len() as f64;
    let w_plus: f64 = ranks
        .doubled
        .iter()
        .filter(|(_, positive)| *positive)
        .map(|(r, _)| *r as f64 / 2.0)
        .sum();
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = ranks
        .tie_runs
        .iter()
        .map(|&t| {
            let t = t as f64;
            (t * t * t - t) / 48.0
        })
        .sum();
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    if variance <= 0.0 {
        return 1.0;
    }
    // continuity correction pulls toward the mean but never across it
    let adjusted = (w_plus - mean).abs().max(0.5) - 0.5;
    let z = adjusted / variance.sqrt();
    libm::erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Two-tailed one-sample Wilcoxon signed-rank test of `sample` against the
/// hypothesized location `m0`.
///
/// Differences of exactly zero are dropped (classical treatment, not
/// Pratt's); tied absolute differences share average ranks. The exact
/// p-value enumerates all sign assignments; the normal approximation uses
/// the tie-corrected variance and a continuity correction. A sample that is
/// entirely zeros returns p = 1.
pub fn wilcoxon_one_sample(sample: &[f64], m0: f64) -> Result<f64, LeakError> {
    wilcoxon_one_sample_with(sample, m0, WilcoxonMethod::Auto)
}

pub fn wilcoxon_one_sample_with(
    sample: &[f64],
    m0: f64,
    method: WilcoxonMethod,
) -> Result<f64, LeakError> {
    if sample.is_empty() {
        return Err(LeakError::EmptySample);
    }
    let ranks = rank_diffs(sample, m0);
    if ranks.doubled.is_empty() {
        return Ok(1.0);
    }
    let exact = match method {
        WilcoxonMethod::Exact => true,
        WilcoxonMethod::Normal => false,
        WilcoxonMethod::Auto => ranks.doubled.len() <= 12,
    };
    Ok(if exact {
        exact_p(&ranks)
    } else {
        normal_p(&ranks)
    })
}

/// Which labels were randomized in the probe run that produced the
/// observed MCC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    /// Labels randomized before splitting; duplicated images carry one
    /// random label on both sides.
    RandomizeBeforeSplit,
    /// Only training labels randomized; the test side keeps originals.
    RandomizeTrainOnly,
}

/// Verdict of comparing an observed MCC against the null distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub observed_mcc: f64,
    pub wilcoxon_p: f64,
    pub empirical_p: f64,
    pub alpha: f64,
    pub flagged: bool,
    pub mode: ProbeMode,
}

/// Two-sided empirical p-value with the plus-one rule, so it can never
/// reach zero: each tail is (count + 1) / (iters + 1).
fn empirical_p(samples: &[f64], observed: f64) -> f64 {
    let le = samples.iter().filter(|s| **s <= observed).count();
    let ge = samples.iter().filter(|s| **s >= observed).count();
    let tail = (le.min(ge) + 1) as f64 / (samples.len() + 1) as f64;
    (2.0 * tail).min(1.0)
}

/// Test an observed MCC against a null distribution.
///
/// The null samples are the Wilcoxon sample and the observed value is the
/// hypothesized location; the empirical percentile is reported alongside.
pub fn leakage_probe(
    observed_mcc: f64,
    null: &NullDistribution,
    alpha: f64,
    mode: ProbeMode,
) -> Result<ProbeReport, LeakError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LeakError::InvalidAlpha { alpha });
    }
    let wilcoxon_p = wilcoxon_one_sample(&null.samples, observed_mcc)?;
    let empirical_p = empirical_p(&null.samples, observed_mcc);
    Ok(ProbeReport {
        observed_mcc,
        wilcoxon_p,
        empirical_p,
        alpha,
        flagged: wilcoxon_p.min(empirical_p) < alpha,
        mode,
    })
}

/// Variant probe with per-fold MCCs as the Wilcoxon sample, tested against
/// the null median; the empirical p-value uses the fold mean. Reported
/// `observed_mcc` is that mean.
pub fn leakage_probe_folds(
    fold_mccs: &[f64],
    null: &NullDistribution,
    alpha: f64,
    mode: ProbeMode,
) -> Result<ProbeReport, LeakError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LeakError::InvalidAlpha { alpha });
    }
    if fold_mccs.is_empty() {
        return Err(LeakError::EmptySample);
    }
    let mut sorted = null.samples.clone();
    if sorted.is_empty() {
        return Err(LeakError::EmptySample);
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite MCC values"));
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    };
    let observed_mcc = fold_mccs.iter().sum::<f64>() / fold_mccs.len() as f64;
    let wilcoxon_p = wilcoxon_one_sample(fold_mccs, median)?;
    let empirical_p = empirical_p(&null.samples, observed_mcc);
    Ok(ProbeReport {
        observed_mcc,
        wilcoxon_p,
        empirical_p,
        alpha,
        flagged: wilcoxon_p.min(empirical_p) < alpha,
        mode,
    })
}
