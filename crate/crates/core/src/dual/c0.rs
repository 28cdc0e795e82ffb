//! Inverse of the anisotropic biharmonic operator
//! `a2222 D1111 - 2 a1122 D11 D22 + a1111 D2222` with clamped rows, scaled by
//! `1 - eps3`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::constitutive::Tensor2D;
use crate::error::{Error, Result};
use crate::plate::PlateOps;

#[derive(Debug, Clone)]
pub struct C0Operator {
    ops: PlateOps,
    /// `(hbar1111, hbar2222, hbar1122)`.
    coef: (f64, f64, f64),
    eps3: f64,
    free: Vec<usize>,
    chol: Cholesky<f64, Dyn>,
}

impl C0Operator {
    /// `hbar` is the inverse bending tensor. Unknowns are nodes with free deflection.
    pub fn new(ops: PlateOps, hbar: &Tensor2D, eps3: f64) -> Result<Self> {
        if !(eps3 > 0.0 && eps3 < 1.0) {
            return Err(Error::Parameter { name: "eps3", reason: format!("must lie in (0, 1), got {eps3}") });
        }
        let coef = (hbar.component(0, 0, 0, 0), hbar.component(1, 1, 1, 1), hbar.component(0, 0, 1, 1));
        let mask = ops.grid.clamp_mask_deflection();
        let free: Vec<usize> = (0..mask.len()).filter(|&k| !mask[k]).collect();
        let nf = free.len();
        let n = ops.n();
        let mut m = DMatrix::zeros(nf, nf);
        let mut e = vec![0.0; n];
        {
            let probe = Self::weak_apply_raw(&ops, coef);
            for (c, &node) in free.iter().enumerate() {
                e[node] = 1.0;
                let r = probe(&e);
                e[node] = 0.0;
                for (r_idx, &row) in free.iter().enumerate() {
                    m[(r_idx, c)] = r[row];
                }
            }
        }
        let m = (&m + m.transpose()) * 0.5;
        let chol = Cholesky::new(m).ok_or_else(|| Error::LinearSolve("biharmonic matrix is not positive definite".into()))?;
        Ok(Self { ops, coef, eps3, free, chol })
    }

    fn weak_apply_raw(ops: &PlateOps, coef: (f64, f64, f64)) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
        move |w: &[f64]| {
            let (a11, a22, a12) = coef;
            let a = ops.gx(&ops.gx(w));
            let b = ops.gy(&ops.gy(w));
            let wt = &ops.weights;
            let ra: Vec<f64> = (0..w.len()).map(|k| wt[k] * (a22 * a[k] - a12 * b[k])).collect();
            let rb: Vec<f64> = (0..w.len()).map(|k| wt[k] * (a11 * b[k] - a12 * a[k])).collect();
            let x = ops.gxt(&ops.gxt(&ra));
            let y = ops.gyt(&ops.gyt(&rb));
            x.iter().zip(&y).map(|(p, q)| p + q).collect()
        }
    }

    pub fn eps3(&self) -> f64 {
        self.eps3
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    /// Strong-form operator applied on the full grid.
    pub fn forward(&self, w: &[f64]) -> Vec<f64> {
        let (a11, a22, a12) = self.coef;
        let o = &self.ops;
        let a = o.gx(&o.gx(w));
        let b = o.gy(&o.gy(w));
        let aa = o.gx(&o.gx(&a));
        let bb = o.gy(&o.gy(&b));
        let ab = o.gx(&o.gx(&b));
        let ba = o.gy(&o.gy(&a));
        (0..w.len()).map(|k| a22 * aa[k] - a12 * (ab[k] + ba[k]) + a11 * bb[k]).collect()
    }

    /// Clamped solution of `A v = y` (no scaling).
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let rhs = DVector::from_iterator(self.free.len(), self.free.iter().map(|&k| self.ops.weights[k] * y[k]));
        let sol = self.chol.solve(&rhs);
        let mut out = vec![0.0; y.len()];
        for (i, &k) in self.free.iter().enumerate() {
            out[k] = sol[i];
        }
        out
    }

    /// `C0 y = (1 - eps3) A^{-1} y`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.solve(y).into_iter().map(|v| (1.0 - self.eps3) * v).collect()
    }

    /// `1/2 int C0(y) y`.
    pub fn half_quadratic(&self, y: &[f64]) -> f64 {
        let c = self.apply(y);
        0.5 * self.ops.integrate(c.iter().zip(y).map(|(a, b)| a * b))
    }
}
