//! Numeric CSV ingestion and emission.
//!
//! The accepted dialect is deliberately narrow: comma-separated,
//! decimal-point reals, UTF-8, one optional header line. Output uses the
//! shortest round-trip decimal representation so that writing a sample
//! and reading it back reproduces the values exactly.

use crate::error::{CliError, Result};
use kendep::Sample;
use std::path::Path;

/// A parsed dataset: the sample plus column names (from the header when
/// present, otherwise x1..xd).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub sample: Sample,
    pub columns: Vec<String>,
    pub source: String,
}

/// Parse CSV text. The first line is treated as a header when at least one
/// of its cells does not parse as a number.
pub fn parse_csv(text: &str, source: &str) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (first_no, first) = lines
        .next()
        .ok_or_else(|| CliError::Parse(format!("{source}: file is empty")))?;
    let first_cells: Vec<&str> = first.split(',').map(str::trim).collect();
    let header_like = first_cells.iter().any(|c| c.parse::<f64>().is_err());

    let mut columns: Vec<String>;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    if header_like {
        columns = first_cells.iter().map(|c| c.to_string()).collect();
    } else {
        columns = (1..=first_cells.len()).map(|j| format!("x{j}")).collect();
        rows.push(parse_row(first_cells.as_slice(), first_no, source)?);
    }

    let width = columns.len();
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != width {
            return Err(CliError::Parse(format!(
                "{source}: line {line_no} has {} cells, expected {width}",
                cells.len()
            )));
        }
        rows.push(parse_row(&cells, line_no, source)?);
    }

    let n = rows.len();
    if n < 2 || width < 2 {
        return Err(CliError::Shape(format!(
            "{source}: need at least 2 rows and 2 columns, found {n} x {width}"
        )));
    }
    let sample = Sample::from_rows(&rows).map_err(CliError::Stat)?;
    if columns.len() != sample.d() {
        columns.truncate(sample.d());
    }
    Ok(Dataset {
        sample,
        columns,
        source: source.to_string(),
    })
}

fn parse_row(cells: &[&str], line_no: usize, source: &str) -> Result<Vec<f64>> {
    cells
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if c.is_empty() {
                return Err(CliError::Parse(format!(
                    "{source}: line {line_no}, column {}: missing value",
                    j + 1
                )));
            }
            c.parse::<f64>().map_err(|_| {
                CliError::Parse(format!(
                    "{source}: line {line_no}, column {}: invalid number {c:?}",
                    j + 1
                ))
            })
        })
        .collect()
}

/// Read and parse a CSV file, optionally restricting to named columns
/// (names from the header, or 1-based indices).
pub fn ingest_csv(path: &Path, columns: Option<&[String]>) -> Result<Dataset> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let dataset = parse_csv(&text, &path.display().to_string())?;
    match columns {
        None => Ok(dataset),
        Some(wanted) => select_columns(&dataset, wanted),
    }
}

/// Restrict a dataset to a subset of columns given by name or 1-based index.
pub fn select_columns(dataset: &Dataset, wanted: &[String]) -> Result<Dataset> {
    let mut idx = Vec::with_capacity(wanted.len());
    for w in wanted {
        let found = dataset
            .columns
            .iter()
            .position(|c| c == w)
            .or_else(|| {
                w.parse::<usize>()
                    .ok()
                    .filter(|&k| k >= 1 && k <= dataset.columns.len())
                    .map(|k| k - 1)
            })
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown column {w:?}; available: {}",
                    dataset.columns.join(", ")
                ))
            })?;
        idx.push(found);
    }
    if idx.len() < 2 {
        return Err(CliError::Shape(format!(
            "column selection must keep at least 2 columns, got {}",
            idx.len()
        )));
    }
    let sample = dataset
        .sample
        .select_columns(&idx)
        .map_err(CliError::Stat)?;
    Ok(Dataset {
        sample,
        columns: idx.iter().map(|&i| dataset.columns[i].clone()).collect(),
        source: dataset.source.clone(),
    })
}

/// Serialize a sample as CSV with the given header. f64 Display produces
/// the shortest representation that round-trips.
pub fn sample_to_csv(sample: &Sample, columns: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for i in 0..sample.n() {
        let row = sample.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Write text to a file, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::io(parent.display().to_string(), e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path.display().to_string(), e))
}
