//! Dataset containers, CSV ingestion and train/test protocols.
//!
//! Tabular defect data arrives as one CSV per release with a header row,
//! numeric metric columns, a boolean label column and (optionally) a LOC
//! column used by the effort-aware goal. Text corpora arrive as a CSV with
//! `text,severe` columns.
//!
//! Two train/test protocols are provided: [`version_split`] trains on all
//! but the newest release and tests on the newest, and [`cross_val_splits`]
//! runs an x-repeat, y-bin shuffled cross-validation for data without
//! version structure.
//!
//! All containers are immutable after construction and safe to share across
//! threads.

use std::fs::File;
use std::path::Path;

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labeled tabular data: one row of numeric metrics per module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// true = defective
    pub labels: Vec<bool>,
    /// lines of code per module, required for Popt(20)
    pub loc: Option<Vec<u64>>,
}

impl Dataset {
    /// Construct with invariant checks: rectangular rows, matching label and
    /// LOC lengths, finite feature values.
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<bool>,
        loc: Option<Vec<u64>>,
    ) -> Result<Self> {
        let name = name.into();
        if rows.len() != labels.len() {
            return Err(Error::InvalidData(format!(
                "{name}: {} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(loc) = &loc {
            if loc.len() != rows.len() {
                return Err(Error::InvalidData(format!(
                    "{name}: {} rows but {} loc entries",
                    rows.len(),
                    loc.len()
                )));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(Error::InvalidData(format!(
                    "{name}: row {i} has {} values, expected {}",
                    row.len(),
                    feature_names.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "{name}: row {i}, column '{}' is not finite",
                    feature_names[j]
                )));
            }
        }
        Ok(Dataset { name, feature_names, rows, labels, loc })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Count of defective-labeled rows.
    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Select the given row indices into a new dataset.
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Dataset {
        Dataset {
            name: name.into(),
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            loc: self.loc.as_ref().map(|loc| indices.iter().map(|&i| loc[i]).collect()),
        }
    }

    /// Write the dataset back out as CSV with the same schema the loader
    /// accepts; values round-trip exactly.
    pub fn to_csv(&self, path: &Path, label_column: &str, loc_column: Option<&str>) -> Result<()> {
        let io_err = |source| Error::Io { path: path.to_path_buf(), source };
        let file = File::create(path).map_err(io_err)?;
        let mut w = csv::Writer::from_writer(file);
        let mut header: Vec<String> = self.feature_names.clone();
        if let Some(lc) = loc_column {
            header.push(lc.to_string());
        }
        header.push(label_column.to_string());
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.rows[i].iter().map(|v| format!("{v}")).collect();
            if loc_column.is_some() {
                let loc = self.loc.as_ref().ok_or_else(|| {
                    Error::InvalidData(format!("{}: loc column requested but absent", self.name))
                })?;
                rec.push(loc[i].to_string());
            }
            rec.push(if self.labels[i] { "1" } else { "0" }.to_string());
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| io_err(e))?;
        Ok(())
    }
}

/// Raw documents with severity labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextCorpus {
    pub name: String,
    pub documents: Vec<String>,
    /// true = severe
    pub labels: Vec<bool>,
}

impl TextCorpus {
    pub fn new(name: impl Into<String>, documents: Vec<String>, labels: Vec<bool>) -> Result<Self> {
        let name = name.into();
        if documents.is_empty() {
            return Err(Error::InvalidData(format!("{name}: corpus is empty")));
        }
        if documents.len() != labels.len() {
            return Err(Error::InvalidData(format!(
                "{name}: {} documents but {} labels",
                documents.len(),
                labels.len()
            )));
        }
        Ok(TextCorpus { name, documents, labels })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> TextCorpus {
        TextCorpus {
            name: name.into(),
            documents: indices.iter().map(|&i| self.documents[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// One train/test pair.
#[derive(Debug, Clone)]
pub struct Split<T> {
    pub train: T,
    pub test: T,
}

/// Parameters of the x-repeat, y-bin cross-validation protocol.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CrossValPlan {
    /// repeats
    pub x: usize,
    /// bins per repeat
    pub y: usize,
    pub seed: u64,
}

impl Default for CrossValPlan {
    fn default() -> Self {
        CrossValPlan { x: 5, y: 5, seed: 1 }
    }
}

impl CrossValPlan {
    pub fn new(x: usize, y: usize, seed: u64) -> Result<Self> {
        if x < 1 || y < 2 {
            return Err(Error::InvalidParam(format!(
                "cross-validation needs x >= 1 and y >= 2 (got x={x}, y={y})"
            )));
        }
        Ok(CrossValPlan { x, y, seed })
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Parse { path: path.to_path_buf(), detail: e.to_string() }
}

fn parse_label(raw: &str, path: &Path, row: usize, column: &str) -> Result<bool> {
    match raw.trim() {
        "0" | "false" | "FALSE" | "False" => Ok(false),
        "1" | "true" | "TRUE" | "True" => Ok(true),
        other => Err(Error::Parse {
            path: path.to_path_buf(),
            detail: format!("row {row}, label column '{column}': '{other}' is not one of 0/1/true/false"),
        }),
    }
}

/// Load a tabular CSV. Every column except the label column (and the LOC
/// column, when named) becomes a feature, in header order.
pub fn load_tabular_csv(
    path: &Path,
    label_column: &str,
    loc_column: Option<&str>,
) -> Result<Dataset> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> =
        reader.headers().map_err(|e| csv_err(path, e))?.iter().map(|h| h.trim().to_string()).collect();

    let label_idx = headers.iter().position(|h| h == label_column).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        detail: format!("label column '{label_column}' not found in header"),
    })?;
    let loc_idx = match loc_column {
        Some(lc) => Some(headers.iter().position(|h| h == lc).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            detail: format!("loc column '{lc}' not found in header"),
        })?),
        None => None,
    };

    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != label_idx && Some(i) != loc_idx)
        .collect();
    let feature_names: Vec<String> = feature_cols.iter().map(|&i| headers[i].clone()).collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut loc = loc_idx.map(|_| Vec::new());
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let row_no = r + 2; // 1-based, after the header line
        if record.len() != headers.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                detail: format!("row {row_no}: {} fields, expected {}", record.len(), headers.len()),
            });
        }
        let mut row = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let raw = record.get(c).unwrap_or("").trim();
            let value: f64 = raw.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                detail: format!("row {row_no}, column '{}': '{raw}' is not numeric", headers[c]),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    detail: format!("row {row_no}, column '{}': value is not finite", headers[c]),
                });
            }
            row.push(value);
        }
        labels.push(parse_label(record.get(label_idx).unwrap_or(""), path, row_no, label_column)?);
        if let (Some(loc), Some(li)) = (loc.as_mut(), loc_idx) {
            let raw = record.get(li).unwrap_or("").trim();
            // LOC values in the wild are sometimes written as floats
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                detail: format!("row {row_no}, loc column: '{raw}' is not a non-negative integer"),
            })?;
            if !(v.is_finite() && v >= 0.0 && v.fract() == 0.0) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    detail: format!("row {row_no}, loc column: '{raw}' is not a non-negative integer"),
                });
            }
            loc.push(v as u64);
        }
        rows.push(row);
    }

    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Dataset::new(name, feature_names, rows, labels, loc)
}

/// Load a text corpus from a CSV with `text` and `severe` columns.
pub fn load_text_csv(path: &Path, label_column: &str) -> Result<TextCorpus> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> =
        reader.headers().map_err(|e| csv_err(path, e))?.iter().map(|h| h.trim().to_string()).collect();
    let text_idx = headers.iter().position(|h| h == "text").ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        detail: "column 'text' not found in header".into(),
    })?;
    let label_idx = headers.iter().position(|h| h == label_column).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        detail: format!("label column '{label_column}' not found in header"),
    })?;

    let mut documents = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let row_no = r + 2;
        documents.push(record.get(text_idx).unwrap_or("").to_string());
        labels.push(parse_label(record.get(label_idx).unwrap_or(""), path, row_no, label_column)?);
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    TextCorpus::new(name, documents, labels)
}

/// Train on every release but the newest; test on the newest.
pub fn version_split(ordered_versions: &[Dataset]) -> Result<Split<Dataset>> {
    if ordered_versions.len() < 2 {
        return Err(Error::InvalidData(format!(
            "version split needs at least 2 versions, got {}",
            ordered_versions.len()
        )));
    }
    let feature_names = &ordered_versions[0].feature_names;
    for v in &ordered_versions[1..] {
        if &v.feature_names != feature_names {
            return Err(Error::InvalidData(format!(
                "feature-name mismatch between versions '{}' and '{}'",
                ordered_versions[0].name, v.name
            )));
        }
    }
    let (test_version, train_versions) = ordered_versions.split_last().unwrap();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let all_have_loc = ordered_versions.iter().all(|v| v.loc.is_some());
    let mut loc = if all_have_loc { Some(Vec::new()) } else { None };
    for v in train_versions {
        rows.extend(v.rows.iter().cloned());
        labels.extend(v.labels.iter().copied());
        if let (Some(loc), Some(vloc)) = (loc.as_mut(), v.loc.as_ref()) {
            loc.extend(vloc.iter().copied());
        }
    }
    let train_name = format!(
        "{}-train",
        train_versions.first().map(|v| v.name.as_str()).unwrap_or("versions")
    );
    let train = Dataset::new(train_name, feature_names.clone(), rows, labels, loc)?;
    let mut test = test_version.clone();
    if !all_have_loc {
        test.loc = None;
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidData("version split produced an empty side".into()));
    }
    Ok(Split { train, test })
}

/// Shuffled x-repeat, y-bin cross-validation. Within each repeat the y test
/// bins partition the corpus and bin sizes differ by at most one. The
/// shuffle is a pure function of `plan.seed` and the repeat index.
pub fn cross_val_splits(corpus: &TextCorpus, plan: &CrossValPlan) -> Result<Vec<Split<TextCorpus>>> {
    let n = corpus.len();
    if n < plan.y {
        return Err(Error::InvalidData(format!(
            "corpus '{}' has {} documents, fewer than y={} bins",
            corpus.name, n, plan.y
        )));
    }
    let mut splits = Vec::with_capacity(plan.x * plan.y);
    for repeat in 0..plan.x {
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng =
            StdRng::seed_from_u64(plan.seed.wrapping_add((repeat as u64).wrapping_mul(0x9E3779B97F4A7C15)));
        order.shuffle(&mut rng);

        // first (n % y) bins get the extra document
        let base = n / plan.y;
        let extra = n % plan.y;
        let mut start = 0;
        for bin in 0..plan.y {
            let size = base + usize::from(bin < extra);
            let test_idx: Vec<usize> = order[start..start + size].to_vec();
            let train_idx: Vec<usize> =
                order[..start].iter().chain(order[start + size..].iter()).copied().collect();
            start += size;
            let label = format!("{}-r{repeat}b{bin}", corpus.name);
            splits.push(Split {
                train: corpus.subset(&train_idx, format!("{label}-train")),
                test: corpus.subset(&test_idx, format!("{label}-test")),
            });
        }
    }
    Ok(splits)
}
