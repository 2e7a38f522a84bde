use crate::{Error, Result};

/// An n x d table of real observations, the universal input.
///
/// Rows are observations, columns are coordinates. Every entry must be
/// finite; duplicated rows and tied coordinate values are legal (real data
/// has ties even though the theory assumes continuous marginals).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>, // row-major, n * d
    n: usize,
    d: usize,
}

impl Sample {
    /// Build a sample from a row-major flat buffer of length `n * d`.
    pub fn from_flat(values: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("sample size n = {n} must be >= 2")));
        }
        if d < 2 {
            return Err(Error::Domain(format!("dimension d = {d} must be >= 2")));
        }
        if values.len() != n * d {
            return Err(Error::Domain(format!(
                "buffer length {} does not match n*d = {}",
                values.len(),
                n * d
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Sample { values, n, d })
    }

    /// Build a sample from rows; all rows must share one length d >= 2.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Domain(format!("sample size n = {n} must be >= 2")));
        }
        let d = rows[0].len();
        let mut values = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Domain(format!(
                    "row {} has {} columns, expected {}",
                    i,
                    row.len(),
                    d
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(values, n, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.values[i * self.d + j]).collect()
    }

    /// Restrict to a subset of columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.d) {
            return Err(Error::Domain(format!(
                "column index {} out of range (d = {})",
                bad, self.d
            )));
        }
        let mut values = Vec::with_capacity(self.n * cols.len());
        for i in 0..self.n {
            let row = self.row(i);
            values.extend(cols.iter().map(|&c| row[c]));
        }
        Self::from_flat(values, self.n, cols.len())
    }

    /// Apply a function per coordinate: `f(column, value) -> value`.
    pub fn map_entries(&self, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n {
            for m in 0..self.d {
                values.push(f(m, self.values[i * self.d + m]));
            }
        }
        Self::from_flat(values, self.n, self.d)
    }

    /// Reorder columns by `perm` (a permutation of 0..d).
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.d {
            return Err(Error::Domain("permutation length mismatch".into()));
        }
        self.select_columns(perm)
    }
}
