//! Experiment harness, cell-occupancy analysis and reporting behind the
//! `dodge` command-line tool.

pub mod cells;
pub mod config;
pub mod harness;
pub mod report;
