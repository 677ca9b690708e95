//! Batch front-end for `infogeo-core`.
//!
//! An experiment is a JSON file naming a seed, a problem, an integrator and
//! an output path; running it writes the trajectory as CSV and returns a
//! one-line summary. See the README for the schema.

pub mod config;
pub mod error;
pub mod gradcheck;
pub mod instances;
pub mod run;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use run::{execute, run, Outcome, Row};
