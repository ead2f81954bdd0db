//! Bundled synthetic benchmark data.
//!
//! The binary-classification suite plants a linear signal in a few of the
//! features and flips a fraction of the labels, giving optimizers
//! something real to find while staying fast. The release-style generator
//! mirrors the shape of the public multi-version defect data (row counts,
//! defect counts, metric names) so the end-to-end pipeline can be driven
//! without shipping third-party data.

use std::path::{Path, PathBuf};

use rand::prelude::*;

use crate::data::{Dataset, Split};
use crate::error::Result;

/// Metric columns mirroring the public OO defect data; `loc` is carried
/// separately as the effort column.
pub const OO_METRIC_NAMES: [&str; 19] = [
    "amc", "avg_cc", "ca", "cam", "cbm", "cbo", "ce", "dam", "dit", "ic", "lcom", "lcom3",
    "max_cc", "mfa", "moa", "noc", "npm", "rfc", "wmc",
];

fn gaussian(rng: &mut StdRng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// One planted-signal dataset: the first four features carry the class
/// signal, the rest are noise. Label noise flips the stated fraction.
pub fn planted_dataset(
    name: &str,
    rows: usize,
    features: usize,
    label_noise: f64,
    seed: u64,
) -> Dataset {
    let mut rng = StdRng::seed_from_u64(seed);
    let informative = features.min(4);
    let mut data_rows = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    let mut loc = Vec::with_capacity(rows);
    for _ in 0..rows {
        let x: Vec<f64> = (0..features).map(|_| gaussian(&mut rng)).collect();
        let signal: f64 = x[..informative].iter().sum();
        let mut label = signal > 0.0;
        if rng.gen_bool(label_noise) {
            label = !label;
        }
        // larger modules trend buggier, like the real effort data
        let base = if label { 300.0 } else { 150.0 };
        let size = (base * (1.0 + 0.8 * gaussian(&mut rng)).abs()).max(5.0);
        data_rows.push(x);
        labels.push(label);
        loc.push(size.round() as u64);
    }
    // guarantee both classes exist
    if !labels.contains(&true) {
        labels[0] = true;
    }
    if !labels.contains(&false) {
        labels[0] = false;
    }
    let names = (0..features).map(|i| format!("f{i}")).collect();
    Dataset::new(name, names, data_rows, labels, Some(loc)).expect("generated data is consistent")
}

/// A train/test pair drawn from the same planted distribution.
pub fn planted_split(
    name: &str,
    train_rows: usize,
    test_rows: usize,
    features: usize,
    label_noise: f64,
    seed: u64,
) -> Split<Dataset> {
    Split {
        train: planted_dataset(&format!("{name}-train"), train_rows, features, label_noise, seed),
        test: planted_dataset(
            &format!("{name}-test"),
            test_rows,
            features,
            label_noise,
            seed.wrapping_add(0x7E57),
        ),
    }
}

/// The bundled suite: `count` datasets of 500 training rows and 10
/// features with varying label noise.
pub fn synthetic_suite(count: usize, base_seed: u64) -> Vec<(String, Split<Dataset>)> {
    (0..count)
        .map(|i| {
            let name = format!("synth-{i:02}");
            let noise = 0.05 + 0.02 * (i % 8) as f64;
            let split =
                planted_split(&name, 500, 250, 10, noise, base_seed.wrapping_add(i as u64 * 1009));
            (name, split)
        })
        .collect()
}

/// Release-shaped defect data: (version, rows, defective rows) triples
/// matching the public poi statistics, with exactly those defect counts.
const POI_SHAPE: [(&str, usize, usize); 4] =
    [("poi-1.5", 237, 141), ("poi-2.0", 314, 37), ("poi-2.5", 385, 248), ("poi-3.0", 442, 281)];

/// Generate the four poi-shaped releases in version order. The combined
/// training releases hold 426 defective of 936 rows; the newest release
/// holds 281 of 442.
pub fn poi_like_versions(seed: u64) -> Vec<Dataset> {
    POI_SHAPE
        .iter()
        .enumerate()
        .map(|(v, &(name, rows, defects))| {
            release_dataset(name, rows, defects, seed.wrapping_add(v as u64 * 77))
        })
        .collect()
}

fn release_dataset(name: &str, rows: usize, defects: usize, seed: u64) -> Dataset {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut labels = vec![false; rows];
    for slot in labels.iter_mut().take(defects) {
        *slot = true;
    }
    labels.shuffle(&mut rng);

    let mut data_rows = Vec::with_capacity(rows);
    let mut loc = Vec::with_capacity(rows);
    for &label in &labels {
        // defective modules trend larger and more coupled
        let shift = if label { 1.0 } else { 0.0 };
        let row: Vec<f64> = OO_METRIC_NAMES
            .iter()
            .enumerate()
            .map(|(j, _)| {
                let scale = 1.0 + (j % 5) as f64;
                let v = (gaussian(&mut rng) + shift * 0.9) * scale + 2.0 * scale;
                (v.abs() * 100.0).round() / 100.0
            })
            .collect();
        let size = 20.0 + (gaussian(&mut rng).abs() + shift) * 220.0;
        data_rows.push(row);
        loc.push(size.round().max(1.0) as u64);
    }
    let names = OO_METRIC_NAMES.iter().map(|s| s.to_string()).collect();
    Dataset::new(name, names, data_rows, labels, Some(loc)).expect("generated data is consistent")
}

/// Write the poi-shaped releases as CSVs into `dir`, named so that
/// lexicographic order is version order. Returns the paths.
pub fn write_poi_fixtures(dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for version in poi_like_versions(seed) {
        let path = dir.join(format!("{}.csv", version.name));
        version.to_csv(&path, "defects", Some("loc"))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Synthetic issue-report corpus: severe and benign reports draw from
/// different vocabularies plus shared filler.
pub fn synthetic_corpus(name: &str, docs: usize, seed: u64) -> crate::data::TextCorpus {
    let severe_words = ["crash", "segfault", "corruption", "deadlock", "overflow", "fatal"];
    let benign_words = ["typo", "cosmetic", "tooltip", "alignment", "wording", "polish"];
    let filler = ["module", "report", "build", "version", "trace", "log"];
    let mut rng = StdRng::seed_from_u64(seed);
    let mut documents = Vec::with_capacity(docs);
    let mut labels = Vec::with_capacity(docs);
    for i in 0..docs {
        let severe = i % 2 == 0;
        let pool = if severe { &severe_words } else { &benign_words };
        let mut words = Vec::new();
        for _ in 0..rng.gen_range(5..12) {
            if rng.gen_bool(0.6) {
                words.push(pool[rng.gen_range(0..pool.len())]);
            } else {
                words.push(filler[rng.gen_range(0..filler.len())]);
            }
        }
        documents.push(words.join(" "));
        labels.push(severe);
    }
    crate::data::TextCorpus::new(name, documents, labels).expect("non-empty corpus")
}

/// Write a text corpus as the `text,severe` CSV the loader expects.
pub fn write_text_fixture(path: &Path, docs: usize, seed: u64) -> Result<()> {
    let corpus = synthetic_corpus("synthetic-issues", docs, seed);
    let io_err = |source| crate::error::Error::Io { path: path.to_path_buf(), source };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["text", "severe"]).map_err(|e| crate::error::Error::Parse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    for (doc, &label) in corpus.documents.iter().zip(&corpus.labels) {
        w.write_record([doc.as_str(), if label { "1" } else { "0" }]).map_err(|e| {
            crate::error::Error::Parse { path: path.to_path_buf(), detail: e.to_string() }
        })?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}
