//! Synthetic minority oversampling.
//!
//! Synthesize-only variant: `m` new minority rows are appended by convex
//! interpolation between a random minority row and one of its `k` nearest
//! minority neighbors under the Minkowski-`r` distance. Majority rows are
//! never touched, so the original dataset is an exact prefix of the output.

use rand::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};

fn minkowski(a: &[f64], b: &[f64], r: f64) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(r)).sum();
    s.powf(1.0 / r)
}

/// Indices of the `k` nearest minority neighbors of minority row `i`
/// (excluding itself), ties broken by original order.
fn nearest_neighbors(minority: &[&Vec<f64>], i: usize, k: usize, r: f64) -> Vec<usize> {
    let mut dists: Vec<(f64, usize)> = minority
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, row)| (minkowski(minority[i], row, r), j))
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    dists.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Append `m` synthetic minority rows. The minority class is the rarer
/// label (defective wins exact ties). Synthetic LOC values, when present,
/// interpolate and round.
pub fn smote(data: &Dataset, k: usize, m: usize, r: f64, seed: u64) -> Result<Dataset> {
    if k < 1 {
        return Err(Error::InvalidParam("smote needs k >= 1".into()));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParam(format!("smote Minkowski exponent must be positive, got {r}")));
    }
    let positives = data.positives();
    let minority_label = positives <= data.len() - positives;
    let minority_idx: Vec<usize> =
        (0..data.len()).filter(|&i| data.labels[i] == minority_label).collect();
    if minority_idx.len() < 2 {
        return Err(Error::InvalidData(format!(
            "smote needs a minority class of at least 2 rows, found {}",
            minority_idx.len()
        )));
    }

    let minority: Vec<&Vec<f64>> = minority_idx.iter().map(|&i| &data.rows[i]).collect();
    let neighbor_table: Vec<Vec<usize>> = (0..minority.len())
        .map(|i| nearest_neighbors(&minority, i, k.min(minority.len() - 1), r))
        .collect();

    let mut out = data.clone();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..m {
        let a = rng.gen_range(0..minority.len());
        let neighbors = &neighbor_table[a];
        let b = neighbors[rng.gen_range(0..neighbors.len())];
        let t: f64 = rng.gen_range(0.0..1.0);
        let row: Vec<f64> = minority[a]
            .iter()
            .zip(minority[b])
            .map(|(x, y)| x + t * (y - x))
            .collect();
        out.rows.push(row);
        out.labels.push(minority_label);
        if let Some(loc) = out.loc.as_mut() {
            let la = loc[minority_idx[a]] as f64;
            let lb = loc[minority_idx[b]] as f64;
            loc.push((la + t * (lb - la)).round().max(1.0) as u64);
        }
    }
    Ok(out)
}
