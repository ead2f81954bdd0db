//! Goal-driven hyperparameter selection for defect prediction and issue
//! text mining.
//!
//! The central idea: scores land in a coarse output space, so tunings whose
//! goal results fall within `epsilon` of earlier results are redundant and
//! their branches of the option tree can be deprecated. The [`dodge`]
//! module implements that search; [`options`] holds the weighted option
//! tree it walks; [`learners`] and [`preprocess`] supply the configurable
//! pipeline pieces; [`metrics`] and [`stats`] score and compare results;
//! [`baselines`] provides random search and differential-evolution
//! comparisons; [`fftree`] is the fast-and-frugal tree classifier.

pub mod baselines;
pub mod data;
pub mod dodge;
pub mod domain;
pub mod error;
pub mod fftree;
pub mod learners;
pub mod metrics;
pub mod options;
pub mod pipeline;
pub mod preprocess;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use metrics::{Goal, GoalScore};
