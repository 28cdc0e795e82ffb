use crate::fields::stencil::{apply_axis, Stencil};
use crate::fields::Grid2;

/// Slice-level difference operators and quadrature weights for one grid.
#[derive(Debug, Clone)]
pub struct PlateOps {
    pub grid: Grid2,
    pub weights: Vec<f64>,
}

/// All first and second differences of a flat `[u1 | u2 | w]` state.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub u1x: Vec<f64>,
    pub u1y: Vec<f64>,
    pub u2x: Vec<f64>,
    pub u2y: Vec<f64>,
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
    pub wxx: Vec<f64>,
    pub wyy: Vec<f64>,
    pub wxy: Vec<f64>,
}

impl Derivatives {
    #[inline]
    pub fn sym_grad(&self, k: usize) -> [f64; 3] {
        [self.u1x[k], self.u2y[k], 0.5 * (self.u1y[k] + self.u2x[k])]
    }

    #[inline]
    pub fn gamma(&self, k: usize) -> [f64; 3] {
        let s = self.sym_grad(k);
        let (a, b) = (self.wx[k], self.wy[k]);
        [s[0] + 0.5 * a * a, s[1] + 0.5 * b * b, s[2] + 0.5 * a * b]
    }

    #[inline]
    pub fn kappa(&self, k: usize) -> [f64; 3] {
        [-self.wxx[k], -self.wyy[k], -self.wxy[k]]
    }
}

impl PlateOps {
    pub fn new(grid: Grid2) -> Self {
        Self { weights: grid.weights(), grid }
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    fn run(&self, v: &[f64], axis: usize, st: Stencil) -> Vec<f64> {
        apply_axis(v, &self.grid.shape(), axis, self.grid.spacing(axis), st)
    }

    pub fn gx(&self, v: &[f64]) -> Vec<f64> {
        self.run(v, 0, Stencil::Sbp)
    }

    pub fn gy(&self, v: &[f64]) -> Vec<f64> {
        self.run(v, 1, Stencil::Sbp)
    }

    pub fn gxt(&self, v: &[f64]) -> Vec<f64> {
        self.run(v, 0, Stencil::SbpTranspose)
    }

    pub fn gyt(&self, v: &[f64]) -> Vec<f64> {
        self.run(v, 1, Stencil::SbpTranspose)
    }

    /// `(w_xx, w_yy, w_xy)` with the mixed entry as `Gx(Gy w)`.
    pub fn hessian(&self, w: &[f64]) -> [Vec<f64>; 3] {
        let wy = self.gy(w);
        [self.gx(&self.gx(w)), self.gy(&wy), self.gx(&wy)]
    }

    /// Transpose of [`Self::hessian`] applied to `(a, b, c)`, summed.
    pub fn hessian_t(&self, a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
        let ta = self.gxt(&self.gxt(a));
        let tb = self.gyt(&self.gyt(b));
        let tc = self.gyt(&self.gxt(c));
        (0..a.len()).map(|k| ta[k] + tb[k] + tc[k]).collect()
    }

    pub fn derivatives(&self, x: &[f64]) -> Derivatives {
        let n = self.n();
        let (u1, u2, w) = (&x[..n], &x[n..2 * n], &x[2 * n..3 * n]);
        let wy = self.gy(w);
        Derivatives {
            u1x: self.gx(u1),
            u1y: self.gy(u1),
            u2x: self.gx(u2),
            u2y: self.gy(u2),
            wx: self.gx(w),
            wxx: self.gx(&self.gx(w)),
            wyy: self.gy(&wy),
            wxy: self.gx(&wy),
            wy,
        }
    }

    /// `sum_k W_k a_k`.
    pub fn integrate(&self, a: impl Iterator<Item = f64>) -> f64 {
        self.weights.iter().zip(a).map(|(w, v)| w * v).sum()
    }
}
