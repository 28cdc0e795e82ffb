//! Versioned solution snapshots: grid plus flat per-field value arrays.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use platedual_core::{Grid2, Grid3};

use crate::config::Model;
use crate::error::CliError;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotGrid {
    Plate(Grid2),
    Elastic(Grid3),
}

impl SnapshotGrid {
    fn field_names(&self) -> [&'static str; 3] {
        match self {
            SnapshotGrid::Plate(_) => ["u1", "u2", "w"],
            SnapshotGrid::Elastic(_) => ["u1", "u2", "u3"],
        }
    }

    fn len(&self) -> usize {
        match self {
            SnapshotGrid::Plate(g) => g.len(),
            SnapshotGrid::Elastic(g) => g.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub version: u32,
    pub model: Model,
    pub grid: SnapshotGrid,
    pub fields: BTreeMap<String, Vec<f64>>,
    pub value: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub converged: bool,
}

impl Solution {
    pub fn new(model: Model, grid: SnapshotGrid, x: &[f64], value: f64, grad_norm: f64, iters: usize, converged: bool) -> Self {
        let n = grid.len();
        let fields = grid
            .field_names()
            .iter()
            .enumerate()
            .map(|(c, name)| (name.to_string(), x[c * n..(c + 1) * n].to_vec()))
            .collect();
        Self { version: SNAPSHOT_VERSION, model, grid, fields, value, grad_norm, iters, converged }
    }

    /// Flat state vector in solver layout.
    pub fn state(&self) -> Result<Vec<f64>, CliError> {
        let n = self.grid.len();
        let mut x = Vec::with_capacity(3 * n);
        for name in self.grid.field_names() {
            let f = self
                .fields
                .get(name)
                .ok_or_else(|| CliError::config(format!("solution is missing field `{name}`")))?;
            if f.len() != n {
                return Err(CliError::config(format!("solution field `{name}` has {} values for {n} nodes", f.len())));
            }
            x.extend_from_slice(f);
        }
        Ok(x)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string(self).expect("snapshot serialization cannot fail");
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let s: Self = serde_json::from_str(&text)
            .map_err(|source| CliError::Json { path: path.display().to_string(), source })?;
        if s.version != SNAPSHOT_VERSION {
            return Err(CliError::config(format!("solution version {} is not supported", s.version)));
        }
        Ok(s)
    }
}
