//! Harness around the `kendep` library: CSV ingestion, JSON reports, the
//! calibration cache, bundled fixtures and reproduction of the reference
//! tables. The `kendep` binary is a thin clap wrapper over these functions.

pub mod cache;
pub mod commands;
pub mod csvio;
pub mod error;
pub mod fixtures;
pub mod report;
pub mod reproduce;

pub use error::{CliError, Result};
