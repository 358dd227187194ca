//! Dense, validated feature matrices.

use crate::error::{Error, Result};

/// An `n x p` matrix of finite reals stored row-major.
///
/// Row indices are stable: row `i` always refers to the `i`-th input row,
/// and every tie-break in the crate uses them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    p: usize,
}

impl Dataset {
    /// Builds a dataset from a flat row-major buffer.
    pub fn from_flat(values: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if p == 0 {
            return Err(Error::RaggedRows {
                row: 0,
                expected: 1,
                found: 0,
            });
        }
        if values.len() != n * p {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n * p,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: pos / p,
                col: pos % p,
            });
        }
        Ok(Self { values, n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p)
    }

    /// Row-major values.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.values
    }

    /// Returns a new dataset holding the given rows in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.p);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self::from_flat(values, indices.len(), self.p)
    }
}

/// Checks raw rows and packs them into a [`Dataset`].
///
/// Never panics; every malformed input maps to a structured error.
pub fn validate_dataset<R: AsRef<[f64]>>(rows: &[R]) -> Result<Dataset> {
    let first = rows.first().ok_or(Error::EmptyDataset)?.as_ref();
    let p = first.len();
    if p == 0 {
        return Err(Error::RaggedRows {
            row: 0,
            expected: 1,
            found: 0,
        });
    }
    let mut values = Vec::with_capacity(rows.len() * p);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != p {
            return Err(Error::RaggedRows {
                row: i,
                expected: p,
                found: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row: i, col: j });
        }
        values.extend_from_slice(row);
    }
    Ok(Dataset {
        values,
        n: rows.len(),
        p,
    })
}
