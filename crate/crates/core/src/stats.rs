//! Statistical comparison machinery for experiment results.
//!
//! Two kinds of comparison are used when reporting:
//!
//! - one result against a sample: differences below [`small_effect`]
//!   (20% of the sample standard deviation) are ignored;
//! - two samples of repeated stochastic runs: a treatment is flagged
//!   `worse` than the best only when its mean is on the losing side, the
//!   A12 effect size exceeds the small boundary, and a bootstrap test finds
//!   the difference significant at the requested confidence.

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conventional A12 boundary above which an effect is more than "small".
pub const A12_SMALL: f64 = 0.6;

/// A labeled collection of goal scores across repeats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    pub label: String,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidData("sample set must be non-empty".into()));
        }
        Ok(SampleSet { label: label.into(), values })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Outcome of comparing one treatment against the best treatment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub label: String,
    pub worse: bool,
    pub significant: bool,
    /// probability that a draw from the losing direction exceeds the best
    pub effect_a12: f64,
    /// the A12 boundary applied
    pub small_effect_threshold: f64,
}

/// 20% of the sample standard deviation (n-1 denominator).
pub fn small_effect(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidData(format!(
            "small effect needs at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(0.2 * (ss / (n - 1.0)).sqrt())
}

/// Probability that a random draw from `xs` exceeds a random draw from
/// `ys`, counting ties as one half. Computed by sorting `ys` and binary
/// searching for each `x`, so it stays cheap on larger samples.
pub fn a12(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(!xs.is_empty() && !ys.is_empty(), "a12 requires non-empty samples");
    let mut sorted: Vec<f64> = ys.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut wins = 0.0;
    for &x in xs {
        let below = sorted.partition_point(|&y| y < x);
        let below_or_eq = sorted.partition_point(|&y| y <= x);
        wins += below as f64 + 0.5 * (below_or_eq - below) as f64;
    }
    wins / (xs.len() as f64 * ys.len() as f64)
}

/// Two-sample bootstrap of the mean difference under the pooled null:
/// reports true when the observed |mean(xs) - mean(ys)| exceeds the
/// `confidence` quantile of the resampled null distribution.
pub fn bootstrap_significant(
    xs: &[f64],
    ys: &[f64],
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<bool> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(Error::InvalidData("bootstrap needs at least 2 values per sample".into()));
    }
    if !(0.0 < confidence && confidence < 1.0) {
        return Err(Error::InvalidParam(format!("confidence must be in (0,1), got {confidence}")));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let observed = (mean(xs) - mean(ys)).abs();

    let pool: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut null_diffs = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let m1: f64 =
            (0..xs.len()).map(|_| pool[rng.gen_range(0..pool.len())]).sum::<f64>() / xs.len() as f64;
        let m2: f64 =
            (0..ys.len()).map(|_| pool[rng.gen_range(0..pool.len())]).sum::<f64>() / ys.len() as f64;
        null_diffs.push((m1 - m2).abs());
    }
    null_diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // nearest-rank quantile
    let idx = ((confidence * resamples as f64).floor() as usize).min(resamples - 1);
    Ok(observed > null_diffs[idx])
}

/// Compare every treatment against the best-mean treatment. A treatment is
/// `worse` only when all three clauses hold: its mean is on the losing
/// side, the A12 effect against the best exceeds [`A12_SMALL`], and the
/// bootstrap rejects similarity.
pub fn compare(treatments: &[SampleSet], maximize: bool, seed: u64) -> Result<Vec<Verdict>> {
    if treatments.len() < 2 {
        return Err(Error::InvalidData(format!(
            "compare needs at least 2 treatments, got {}",
            treatments.len()
        )));
    }
    let best_idx = (0..treatments.len())
        .min_by(|&a, &b| {
            let (ma, mb) = (treatments[a].mean(), treatments[b].mean());
            if maximize {
                mb.partial_cmp(&ma).unwrap()
            } else {
                ma.partial_cmp(&mb).unwrap()
            }
        })
        .unwrap();
    let best = &treatments[best_idx];

    let mut verdicts = Vec::with_capacity(treatments.len());
    for (i, t) in treatments.iter().enumerate() {
        if i == best_idx {
            verdicts.push(Verdict {
                label: t.label.clone(),
                worse: false,
                significant: false,
                effect_a12: 0.5,
                small_effect_threshold: A12_SMALL,
            });
            continue;
        }
        let losing_mean = if maximize { t.mean() < best.mean() } else { t.mean() > best.mean() };
        // orient A12 so it measures how often the treatment lands on the
        // losing side of the best
        let effect = if maximize { a12(&best.values, &t.values) } else { a12(&t.values, &best.values) };
        let significant =
            bootstrap_significant(&t.values, &best.values, 1000, 0.95, seed.wrapping_add(i as u64))?;
        verdicts.push(Verdict {
            label: t.label.clone(),
            worse: losing_mean && effect > A12_SMALL && significant,
            significant,
            effect_a12: effect,
            small_effect_threshold: A12_SMALL,
        });
    }
    Ok(verdicts)
}
