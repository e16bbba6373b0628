//! Parameter-grid manifests: named, ordered rendering-parameter value lists
//! plus a bijection from parameter-value combinations to feature ids.
//!
//! The manifest is a JSON document:
//!
//! ```json
//! {
//!   "parameters": [
//!     {"name": "altitude", "values": ["10", "20", "30"]},
//!     {"name": "pose", "values": ["stand", "prone"], "angular": false}
//!   ],
//!   "assignment": ["id0", "id1", "id2", "id3", "id4", "id5"]
//! }
//! ```
//!
//! `assignment` is positional: entry i names the feature id of the i-th
//! combination in row-major order with the last parameter varying fastest.
//! `angular` marks a parameter whose first and last values are also
//! neighbors (wrap-around); it defaults to false.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridParameter {
    pub name: String,
    pub values: Vec<String>,
    #[serde(default)]
    pub angular: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridManifest {
    parameters: Vec<GridParameter>,
    assignment: Vec<String>,
}

impl GridManifest {
    pub fn new(parameters: Vec<GridParameter>, assignment: Vec<String>) -> Result<Self> {
        let manifest = GridManifest {
            parameters,
            assignment,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    fn validate(&self) -> Result<()> {
        if self.parameters.is_empty() {
            return Err(Error::GridInvalid {
                msg: "no parameters declared".into(),
            });
        }
        for (i, p) in self.parameters.iter().enumerate() {
            if p.name.is_empty() {
                return Err(Error::GridInvalid {
                    msg: format!("parameter {i} has an empty name"),
                });
            }
            if self.parameters[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::GridInvalid {
                    msg: format!("duplicate parameter name {:?}", p.name),
                });
            }
            if p.values.is_empty() {
                return Err(Error::GridInvalid {
                    msg: format!("parameter {:?} has no values", p.name),
                });
            }
            for (j, v) in p.values.iter().enumerate() {
                if p.values[..j].contains(v) {
                    return Err(Error::GridInvalid {
                        msg: format!("parameter {:?} repeats value {v:?}", p.name),
                    });
                }
            }
        }
        let combos = self.combo_count();
        if self.assignment.len() != combos {
            return Err(Error::GridCountMismatch {
                combos,
                assigned: self.assignment.len(),
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(combos);
        for id in &self.assignment {
            if !seen.insert(id.as_str()) {
                return Err(Error::GridDuplicateAssignment { id: id.clone() });
            }
        }
        Ok(())
    }

    pub fn parameters(&self) -> &[GridParameter] {
        &self.parameters
    }

    pub fn parameter(&self, name: &str) -> Option<&GridParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Total number of parameter-value combinations.
    pub fn combo_count(&self) -> usize {
        self.parameters.iter().map(|p| p.values.len()).product()
    }

    /// Feature id of the combination at the given per-parameter positions.
    pub fn id_at(&self, positions: &[usize]) -> &str {
        &self.assignment[self.flat_index(positions)]
    }

    /// Row-major flat index, last parameter fastest.
    pub fn flat_index(&self, positions: &[usize]) -> usize {
        debug_assert_eq!(positions.len(), self.parameters.len());
        let mut idx = 0;
        for (p, &pos) in self.parameters.iter().zip(positions) {
            idx = idx * p.values.len() + pos;
        }
        idx
    }

    pub fn assignment(&self) -> &[String] {
        &self.assignment
    }

    /// Iterates every combination as (positions, id), in assignment order.
    pub fn combos(&self) -> ComboIter<'_> {
        ComboIter {
            grid: self,
            positions: vec![0; self.parameters.len()],
            next: 0,
        }
    }
}

pub struct ComboIter<'a> {
    grid: &'a GridManifest,
    positions: Vec<usize>,
    next: usize,
}

impl<'a> Iterator for ComboIter<'a> {
    type Item = (Vec<usize>, &'a str);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.grid.assignment.len() {
            return None;
        }
        let out = (
            self.positions.clone(),
            self.grid.assignment[self.next].as_str(),
        );
        self.next += 1;
        // odometer increment, last parameter fastest
        for k in (0..self.positions.len()).rev() {
            self.positions[k] += 1;
            if self.positions[k] < self.grid.parameters[k].values.len() {
                break;
            }
            self.positions[k] = 0;
        }
        Some(out)
    }
}

pub fn read_grid_manifest<P: AsRef<Path>>(path: P) -> Result<GridManifest> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let raw: GridManifest = serde_json::from_str(&text)?;
    raw.validate()?;
    Ok(raw)
}
