//! Experiment drivers. Each writes its CSV files and a summary JSON, then
//! re-reads the CSVs and checks them against the summary.

mod bai;
mod compare;
mod config;
mod coverage;
mod output;

pub use bai::*;
pub use compare::*;
pub use config::{CoverageLoss, ExperimentConfig};
pub use coverage::*;
pub use output::{format_sig, read_csv, write_csv, write_json, Written};
