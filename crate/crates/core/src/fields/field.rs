use std::io::Write;

use serde::{Deserialize, Serialize};

use super::grid::{Grid2, Grid3};

/// Scalar nodal values on a [`Grid2`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField2 {
    pub grid: Grid2,
    pub values: Vec<f64>,
}

impl ScalarField2 {
    pub fn zeros(grid: Grid2) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid2, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: Grid2, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.coords(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: Grid2, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count does not match grid");
        Self { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// Sup-norm over nodes selected by `mask`.
    pub fn max_abs_where(&self, mask: &[bool]) -> f64 {
        self.values.iter().zip(mask).filter(|(_, m)| **m).fold(0.0, |a, (v, _)| a.max(v.abs()))
    }

    /// Write `x,y,value` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,value")?;
        for (k, v) in self.values.iter().enumerate() {
            let (x, y) = self.grid.coords(k);
            writeln!(w, "{x},{y},{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField2 {
    pub grid: Grid2,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField2 {
    pub fn zeros(grid: Grid2) -> Self {
        Self { grid, x: vec![0.0; grid.len()], y: vec![0.0; grid.len()] }
    }

    pub fn component(&self, a: usize) -> &[f64] {
        match a {
            0 => &self.x,
            _ => &self.y,
        }
    }
}

/// Symmetric 2x2 tensor per node, stored as `(t11, t22, t12)` with the
/// physical (not engineering) off-diagonal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensorField2 {
    pub grid: Grid2,
    pub t11: Vec<f64>,
    pub t22: Vec<f64>,
    pub t12: Vec<f64>,
}

impl SymTensorField2 {
    pub fn zeros(grid: Grid2) -> Self {
        let n = grid.len();
        Self { grid, t11: vec![0.0; n], t22: vec![0.0; n], t12: vec![0.0; n] }
    }

    pub fn from_fn(grid: Grid2, f: impl Fn(f64, f64) -> [f64; 3]) -> Self {
        let mut t = Self::zeros(grid);
        for k in 0..grid.len() {
            let (x, y) = grid.coords(k);
            let [a, b, c] = f(x, y);
            t.t11[k] = a;
            t.t22[k] = b;
            t.t12[k] = c;
        }
        t
    }

    /// Component `(a, b)` with zero-based indices.
    pub fn component(&self, a: usize, b: usize) -> &[f64] {
        match (a, b) {
            (0, 0) => &self.t11,
            (1, 1) => &self.t22,
            _ => &self.t12,
        }
    }

    #[inline]
    pub fn node(&self, k: usize) -> [f64; 3] {
        [self.t11[k], self.t22[k], self.t12[k]]
    }

    pub fn set_node(&mut self, k: usize, v: [f64; 3]) {
        self.t11[k] = v[0];
        self.t22[k] = v[1];
        self.t12[k] = v[2];
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let f = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + s * y).collect();
        Self {
            grid: self.grid,
            t11: f(&self.t11, &other.t11),
            t22: f(&self.t22, &other.t22),
            t12: f(&self.t12, &other.t12),
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.t11).max(max_abs(&self.t22)).max(max_abs(&self.t12))
    }

    /// Pointwise full contraction `A : B = a11 b11 + a22 b22 + 2 a12 b12`.
    pub fn dot_pointwise(&self, other: &Self) -> Vec<f64> {
        (0..self.t11.len())
            .map(|k| {
                self.t11[k] * other.t11[k] + self.t22[k] * other.t22[k] + 2.0 * self.t12[k] * other.t12[k]
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField3 {
    pub grid: Grid3,
    pub values: Vec<f64>,
}

impl ScalarField3 {
    pub fn zeros(grid: Grid3) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> f64) -> Self {
        Self { grid, values: (0..grid.len()).map(|n| f(grid.coords(n))).collect() }
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}
