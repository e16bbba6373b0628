//! Loading, validating and persisting feature-embedding datasets and
//! parameter-grid manifests. Everything downstream consumes data through the
//! types in this module; readers are pure functions of file contents and the
//! resulting values are immutable.

mod binary;
mod csv_io;
mod grid;

pub use binary::{read_binary, write_binary};
pub use csv_io::read_csv;
pub use grid::{read_grid_manifest, GridManifest, GridParameter};

use std::collections::HashMap;

use crate::error::{Error, Result};

/// An immutable set of n feature vectors of dimension d with stable string
/// ids and optional per-row detection scores in [0, 1].
#[derive(Debug, Clone)]
pub struct FeatureSet {
    ids: Vec<String>,
    dim: usize,
    /// Row-major n×d values, all finite.
    data: Vec<f64>,
    scores: Option<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl FeatureSet {
    /// Builds a feature set, enforcing every type invariant: unique ids,
    /// finite entries, score count and range.
    pub fn new(
        ids: Vec<String>,
        dim: usize,
        data: Vec<f64>,
        scores: Option<Vec<f64>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        let n = ids.len();
        if data.len() != n * dim {
            return Err(Error::Csv {
                row: 0,
                msg: format!("expected {} values for {n} rows, got {}", n * dim, data.len()),
            });
        }
        let mut index = HashMap::with_capacity(n);
        for (row, id) in ids.iter().enumerate() {
            if let Some(first) = index.insert(id.clone(), row) {
                return Err(Error::DuplicateId {
                    id: id.clone(),
                    first_row: first + 1,
                    second_row: row + 1,
                });
            }
        }
        for (i, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: i / dim + 1,
                    col: i % dim,
                });
            }
        }
        if let Some(s) = &scores {
            if s.len() != n {
                return Err(Error::ScoresLengthMismatch {
                    expected: n,
                    got: s.len(),
                });
            }
            for (row, &v) in s.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::ScoreOutOfRange { row: row + 1, value: v });
                }
            }
        }
        Ok(FeatureSet {
            ids,
            dim,
            data,
            scores,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, row: usize) -> &str {
        &self.ids[row]
    }

    /// Row as a contiguous slice of length `dim`.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn scores(&self) -> Option<&[f64]> {
        self.scores.as_deref()
    }

    /// Row index for an id, if present.
    pub fn row_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}
