//! Column-wise numeric transforms for tabular data.
//!
//! Each transform fits statistics on the training rows only; `apply` reuses
//! those statistics and never re-fits. Degenerate columns (zero spread)
//! map to zero rather than NaN.

use rand::prelude::*;

/// Per-column statistics captured at fit time.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalerState {
    Standard { means: Vec<f64>, stds: Vec<f64> },
    MinMax { mins: Vec<f64>, maxs: Vec<f64> },
    MaxAbs { maxabs: Vec<f64> },
    Robust { centers: Vec<f64>, scales: Vec<f64> },
    /// column mean-centering (double-centering of the linear kernel
    /// projected back onto the features)
    KernelCenterer { means: Vec<f64> },
    Quantile { references: Vec<Vec<f64>>, normal_output: bool },
    /// row-wise, no fitted state
    Normalizer { norm: RowNorm },
    Binarizer { threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowNorm {
    L1,
    L2,
    Max,
}

fn column(rows: &[Vec<f64>], j: usize) -> impl Iterator<Item = f64> + '_ {
    rows.iter().map(move |r| r[j])
}

fn n_cols(rows: &[Vec<f64>]) -> usize {
    rows.first().map(Vec::len).unwrap_or(0)
}

/// Linear-interpolated percentile of a sorted slice, q in [0, 100].
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q / 100.0 * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn fit_standard(rows: &[Vec<f64>]) -> ScalerState {
    let d = n_cols(rows);
    let n = rows.len() as f64;
    let mut means = vec![0.0; d];
    for row in rows {
        for (m, &v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut stds = vec![0.0; d];
    for row in rows {
        for (j, &v) in row.iter().enumerate() {
            stds[j] += (v - means[j]).powi(2);
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
    }
    ScalerState::Standard { means, stds }
}

pub fn fit_minmax(rows: &[Vec<f64>]) -> ScalerState {
    let d = n_cols(rows);
    let mut mins = vec![f64::INFINITY; d];
    let mut maxs = vec![f64::NEG_INFINITY; d];
    for row in rows {
        for (j, &v) in row.iter().enumerate() {
            mins[j] = mins[j].min(v);
            maxs[j] = maxs[j].max(v);
        }
    }
    ScalerState::MinMax { mins, maxs }
}

pub fn fit_maxabs(rows: &[Vec<f64>]) -> ScalerState {
    let d = n_cols(rows);
    let mut maxabs = vec![0.0f64; d];
    for row in rows {
        for (j, &v) in row.iter().enumerate() {
            maxabs[j] = maxabs[j].max(v.abs());
        }
    }
    ScalerState::MaxAbs { maxabs }
}

/// Center on the median, scale by the (a, b) percentile range.
pub fn fit_robust(rows: &[Vec<f64>], q_lo: f64, q_hi: f64) -> ScalerState {
    let d = n_cols(rows);
    let mut centers = Vec::with_capacity(d);
    let mut scales = Vec::with_capacity(d);
    for j in 0..d {
        let mut vals: Vec<f64> = column(rows, j).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        centers.push(percentile(&vals, 50.0));
        scales.push(percentile(&vals, q_hi) - percentile(&vals, q_lo));
    }
    ScalerState::Robust { centers, scales }
}

pub fn fit_kernel_centerer(rows: &[Vec<f64>]) -> ScalerState {
    if let ScalerState::Standard { means, .. } = fit_standard(rows) {
        ScalerState::KernelCenterer { means }
    } else {
        unreachable!()
    }
}

/// Empirical-CDF map built from `n_quantiles` reference points over a
/// seeded subsample of at most `subsample` rows.
pub fn fit_quantile(
    rows: &[Vec<f64>],
    n_quantiles: usize,
    subsample: usize,
    normal_output: bool,
    seed: u64,
) -> ScalerState {
    let n = rows.len();
    let use_rows: Vec<usize> = if n <= subsample {
        (0..n).collect()
    } else {
        let mut rng = StdRng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, n, subsample).into_vec()
    };
    let n_q = n_quantiles.clamp(2, use_rows.len().max(2));
    let d = n_cols(rows);
    let mut references = Vec::with_capacity(d);
    for j in 0..d {
        let mut vals: Vec<f64> = use_rows.iter().map(|&i| rows[i][j]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let refs: Vec<f64> =
            (0..n_q).map(|k| percentile(&vals, 100.0 * k as f64 / (n_q - 1) as f64)).collect();
        references.push(refs);
    }
    ScalerState::Quantile { references, normal_output }
}

/// Acklam's rational approximation to the inverse normal CDF
/// (relative error below 1.2e-9).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal_cdf(1.0 - p)
    }
}

/// CDF position of `v` among the sorted reference points, by linear
/// interpolation.
fn quantile_position(refs: &[f64], v: f64) -> f64 {
    let n = refs.len();
    if v <= refs[0] {
        return 0.0;
    }
    if v >= refs[n - 1] {
        return 1.0;
    }
    let i = refs.partition_point(|&r| r <= v);
    let (lo, hi) = (refs[i - 1], refs[i]);
    let frac = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    ((i - 1) as f64 + frac) / (n - 1) as f64
}

pub fn apply_scaler(state: &ScalerState, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    match state {
        ScalerState::Standard { means, stds } => rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| if stds[j] > 0.0 { (v - means[j]) / stds[j] } else { 0.0 })
                    .collect()
            })
            .collect(),
        ScalerState::MinMax { mins, maxs } => rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let span = maxs[j] - mins[j];
                        if span > 0.0 {
                            (v - mins[j]) / span
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect(),
        ScalerState::MaxAbs { maxabs } => rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| if maxabs[j] > 0.0 { v / maxabs[j] } else { 0.0 })
                    .collect()
            })
            .collect(),
        ScalerState::Robust { centers, scales } => rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let centered = v - centers[j];
                        if scales[j] > 0.0 {
                            centered / scales[j]
                        } else {
                            centered
                        }
                    })
                    .collect()
            })
            .collect(),
        ScalerState::KernelCenterer { means } => rows
            .iter()
            .map(|row| row.iter().enumerate().map(|(j, &v)| v - means[j]).collect())
            .collect(),
        ScalerState::Quantile { references, normal_output } => rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let u = quantile_position(&references[j], v);
                        if *normal_output {
                            // clip away the unbounded tails
                            inverse_normal_cdf(u.clamp(1e-7, 1.0 - 1e-7))
                        } else {
                            u
                        }
                    })
                    .collect()
            })
            .collect(),
        ScalerState::Normalizer { norm } => rows.iter().map(|row| normalize_row(row, *norm)).collect(),
        ScalerState::Binarizer { threshold } => rows
            .iter()
            .map(|row| row.iter().map(|&v| if v > *threshold { 1.0 } else { 0.0 }).collect())
            .collect(),
    }
}

pub fn normalize_row(row: &[f64], norm: RowNorm) -> Vec<f64> {
    let scale = match norm {
        RowNorm::L1 => row.iter().map(|v| v.abs()).sum::<f64>(),
        RowNorm::L2 => row.iter().map(|v| v * v).sum::<f64>().sqrt(),
        RowNorm::Max => row.iter().map(|v| v.abs()).fold(0.0, f64::max),
    };
    if scale > 0.0 {
        row.iter().map(|v| v / scale).collect()
    } else {
        row.to_vec()
    }
}
