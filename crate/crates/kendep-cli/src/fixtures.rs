//! Bundled datasets.

use crate::csvio::{parse_csv, Dataset};

/// Liver-injury biomarker panel: 208 patients, columns DB, AST, ALT, AP.
/// Shipped as `data/biomarkers.csv` and embedded here for tests and the
/// `--input biomarkers` shortcut.
pub const BIOMARKERS_CSV: &str = include_str!("../data/biomarkers.csv");

pub fn biomarkers() -> Dataset {
    parse_csv(BIOMARKERS_CSV, "builtin:biomarkers").expect("bundled fixture parses")
}
