//! Experiment configuration: the JSON schema consumed by
//! `dodge experiment`.
//!
//! ```json
//! {
//!   "task": "defect",
//!   "datasets": ["data/poi"],
//!   "treatments": [
//!     {"kind": "dodge", "epsilon": 0.2, "n": 30},
//!     {"kind": "fft"},
//!     {"kind": "random", "n": 30},
//!     {"kind": "smotuned", "learner": "DecisionTree"},
//!     {"kind": "de-rf"},
//!     {"kind": "untuned", "learner": "RandomForest"}
//!   ],
//!   "goals": ["d2h", "popt20"],
//!   "repeats": 25,
//!   "base_seed": 1,
//!   "output_dir": "runs/poi"
//! }
//! ```
//!
//! Defect datasets are directories of per-release CSVs (lexicographic file
//! order is release order); text datasets are single `text,severe` CSVs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dodge_core::error::{Error, Result};
use dodge_core::learners::LearnerKind;
use dodge_core::metrics::Goal;
use dodge_core::options::TaskKind;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Treatment {
    Dodge {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default = "default_n")]
        n: usize,
        /// random-exploration evaluations before weighted descent
        #[serde(default = "default_n1")]
        n1: usize,
    },
    Fft,
    Random {
        #[serde(default = "default_n")]
        n: usize,
    },
    Smotuned {
        #[serde(default = "default_smotuned_learner")]
        learner: String,
    },
    DeRf,
    Untuned {
        learner: String,
    },
}

fn default_epsilon() -> f64 {
    0.2
}

fn default_n() -> usize {
    30
}

fn default_n1() -> usize {
    12
}

fn default_smotuned_learner() -> String {
    "DecisionTree".into()
}

impl Treatment {
    /// Stable name used in records and reports.
    pub fn name(&self) -> String {
        match self {
            Treatment::Dodge { epsilon, n, n1 } => {
                if *n1 == default_n1() {
                    format!("dodge(e={epsilon},n={n})")
                } else {
                    format!("dodge(e={epsilon},n={n},n1={n1})")
                }
            }
            Treatment::Fft => "fft".into(),
            Treatment::Random { n } => format!("random{n}"),
            Treatment::Smotuned { learner } => format!("smotuned({learner})"),
            Treatment::DeRf => "de-rf".into(),
            Treatment::Untuned { learner } => format!("untuned({learner})"),
        }
    }
}

fn default_repeats() -> usize {
    25
}

fn default_label_column() -> String {
    "defects".into()
}

fn default_text_label_column() -> String {
    "severe".into()
}

fn default_loc_column() -> String {
    "loc".into()
}

fn default_cross() -> usize {
    5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub datasets: Vec<PathBuf>,
    pub treatments: Vec<Treatment>,
    pub goals: Vec<Goal>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    #[serde(default = "default_text_label_column")]
    pub text_label_column: String,
    /// set to null in the JSON to load defect data without a LOC column
    #[serde(default = "default_loc_column")]
    pub loc_column: String,
    /// cross-validation repeats for the text task
    #[serde(default = "default_cross")]
    pub cross_x: usize,
    /// cross-validation bins for the text task
    #[serde(default = "default_cross")]
    pub cross_y: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let config: ExperimentConfig = serde_json::from_str(&raw).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() || self.treatments.is_empty() || self.goals.is_empty() {
            return Err(Error::InvalidParam(
                "experiment needs at least one dataset, treatment and goal".into(),
            ));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParam("repeats must be at least 1".into()));
        }
        if self.task == TaskKind::Text && self.goals.contains(&Goal::Popt20) {
            return Err(Error::Incompatible(
                "Popt(20) measures source-code inspection effort; the text task has no LOC".into(),
            ));
        }
        for t in &self.treatments {
            match t {
                Treatment::Dodge { epsilon, n, n1 } => {
                    if !(*epsilon > 0.0 && *epsilon < 1.0) {
                        return Err(Error::InvalidParam(format!(
                            "dodge epsilon must be in (0,1), got {epsilon}"
                        )));
                    }
                    if *n < 2 || *n1 < 1 || *n1 >= *n {
                        return Err(Error::InvalidParam(format!(
                            "dodge needs n >= 2 and 1 <= n1 < n (got n={n}, n1={n1})"
                        )));
                    }
                }
                Treatment::Random { n } if *n < 1 => {
                    return Err(Error::InvalidParam("random search needs n >= 1".into()))
                }
                Treatment::Smotuned { learner } | Treatment::Untuned { learner } => {
                    learner.parse::<LearnerKind>()?;
                }
                _ => {}
            }
            if self.task == TaskKind::Text
                && matches!(t, Treatment::Smotuned { .. } | Treatment::DeRf)
            {
                return Err(Error::Incompatible(format!(
                    "treatment '{}' tunes tabular preprocessing; it does not apply to text",
                    t.name()
                )));
            }
        }
        Ok(())
    }
}
