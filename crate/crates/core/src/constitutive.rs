//! Fourth-order constitutive tensors in Mandel form.
//!
//! A symmetric tensor `E` is stored in fields as `(e11, e22, e12)` (physical
//! off-diagonal). Tensors map onto the Mandel vector `(e11, e22, sqrt2 e12)`,
//! where a fourth-order tensor with minor symmetries becomes a symmetric 3x3
//! matrix `C` with `E : T : E = e^T C e` and the Mandel image of `T : E` equal
//! to `C e`. Eigenvalues of `C` are the eigenvalues of `T` on the space of
//! symmetric tensors, and the matrix inverse is the inverse on that space.
//! The 3D tensors use the same convention with order `(11, 22, 33, 23, 13, 12)`.

use nalgebra::{Matrix3, Matrix6, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::SymTensorField2;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Lamé constants and plate thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LameParams {
    pub lambda_h: f64,
    pub mu_h: f64,
    pub thickness_h: f64,
}

impl LameParams {
    pub fn new(lambda_h: f64, mu_h: f64, thickness_h: f64) -> Result<Self> {
        let p = Self { lambda_h, mu_h, thickness_h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda_h", self.lambda_h), ("mu_h", self.mu_h), ("thickness_h", self.thickness_h)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter { name, reason: format!("must be positive, got {v}") });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor2D {
    /// Mandel matrix.
    pub mandel: Matrix3<f64>,
    pub is_inverse: bool,
}

#[inline]
fn pair2(a: usize, b: usize) -> usize {
    if a == b {
        a
    } else {
        2
    }
}

impl Tensor2D {
    pub fn from_mandel(mandel: Matrix3<f64>) -> Self {
        Self { mandel, is_inverse: false }
    }

    /// Build from an index-form function `T(a, b, c, d)` (zero-based).
    /// Assumes minor symmetries.
    pub fn from_index_fn(t: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let pairs = [(0, 0), (1, 1), (0, 1)];
        let mut m = Matrix3::zeros();
        for (p, &(a, b)) in pairs.iter().enumerate() {
            for (q, &(c, d)) in pairs.iter().enumerate() {
                let f = if p == 2 { SQRT2 } else { 1.0 } * if q == 2 { SQRT2 } else { 1.0 };
                m[(p, q)] = f * t(a, b, c, d);
            }
        }
        Self::from_mandel(m)
    }

    /// Identity on symmetric tensors.
    pub fn identity() -> Self {
        Self::from_mandel(Matrix3::identity())
    }

    /// Index-form component `T_{abcd}` (zero-based).
    pub fn component(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let (p, q) = (pair2(a, b), pair2(c, d));
        let f = if p == 2 { SQRT2 } else { 1.0 } * if q == 2 { SQRT2 } else { 1.0 };
        self.mandel[(p, q)] / f
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { mandel: self.mandel * s, is_inverse: self.is_inverse }
    }

    /// `T : E` for one node, `E = (e11, e22, e12)`.
    #[inline]
    pub fn apply(&self, e: [f64; 3]) -> [f64; 3] {
        let m = &self.mandel;
        let v = [e[0], e[1], SQRT2 * e[2]];
        let s = |r: usize| m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2];
        [s(0), s(1), s(2) / SQRT2]
    }

    /// `E : T : E` for one node.
    #[inline]
    pub fn quad(&self, e: [f64; 3]) -> f64 {
        let s = self.apply(e);
        s[0] * e[0] + s[1] * e[1] + 2.0 * s[2] * e[2]
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        let ev = SymmetricEigen::new(self.mandel).eigenvalues;
        let mut v = [ev[0], ev[1], ev[2]];
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Mandel matrix as nested rows, for reports.
    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.mandel;
        [[m[(0, 0)], m[(0, 1)], m[(0, 2)]], [m[(1, 0)], m[(1, 1)], m[(1, 2)]], [m[(2, 0)], m[(2, 1)], m[(2, 2)]]]
    }
}

/// `H_{abcd} = h (4 lambda mu / (lambda + 2 mu) d_ab d_cd + 2 mu (d_ac d_bd + d_ad d_bc))`.
pub fn build_membrane_tensor(p: &LameParams) -> Result<Tensor2D> {
    p.validate()?;
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let lam = 4.0 * p.lambda_h * p.mu_h / (p.lambda_h + 2.0 * p.mu_h);
    let (h, mu) = (p.thickness_h, p.mu_h);
    Ok(Tensor2D::from_index_fn(|a, b, c, e| {
        h * (lam * d(a, b) * d(c, e) + 2.0 * mu * (d(a, c) * d(b, e) + d(a, e) * d(b, c)))
    }))
}

/// Bending tensor `h^2 / 3 * H`.
pub fn build_bending_tensor(membrane: &Tensor2D, p: &LameParams) -> Tensor2D {
    membrane.scaled(p.thickness_h * p.thickness_h / 3.0)
}

/// Inverse on the symmetric subspace.
pub fn invert_sym4(t: &Tensor2D) -> Result<Tensor2D> {
    let inv = t
        .mandel
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Inversion(format!("singular tensor (det = {:.3e})", t.mandel.determinant())))?;
    // symmetrize away round-off
    let inv = (inv + inv.transpose()) * 0.5;
    Ok(Tensor2D { mandel: inv, is_inverse: !t.is_inverse })
}

/// Pointwise `S = T : E`.
pub fn contract4(t: &Tensor2D, e: &SymTensorField2) -> SymTensorField2 {
    let mut s = SymTensorField2::zeros(e.grid);
    for k in 0..e.t11.len() {
        s.set_node(k, t.apply(e.node(k)));
    }
    s
}

/// Eigenvalues (ascending) of a symmetric 2x2 matrix `(a11, a22, a12)`.
pub fn sym2_eigenvalues(a: [f64; 3]) -> (f64, f64) {
    let m = 0.5 * (a[0] + a[1]);
    let r = (0.25 * (a[0] - a[1]).powi(2) + a[2] * a[2]).sqrt();
    (m - r, m + r)
}

/// Closed-form inverse of a symmetric 2x2 matrix; `None` below the
/// determinant threshold.
pub fn sym2_inverse(a: [f64; 3]) -> Option<[f64; 3]> {
    let det = a[0] * a[1] - a[2] * a[2];
    if det.abs() <= 1e-14 {
        return None;
    }
    Some([a[1] / det, a[0] / det, -a[2] / det])
}

/// Pointwise `(N + K delta)^{-1}`; fails at the first node where `N + K delta`
/// is not positive definite.
pub fn nk_inverse_field(n: &SymTensorField2, k: f64) -> Result<SymTensorField2> {
    let mut out = SymTensorField2::zeros(n.grid);
    for node in 0..n.t11.len() {
        let a = [n.t11[node] + k, n.t22[node] + k, n.t12[node]];
        let (lo, hi) = sym2_eigenvalues(a);
        let inv = if lo > 0.0 { sym2_inverse(a) } else { None };
        match inv {
            Some(v) => out.set_node(node, v),
            None => return Err(Error::BStarViolation { node, eig_min: lo, eig_max: hi }),
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of `N + K delta` over all nodes.
pub fn nk_margin(n: &SymTensorField2, k: f64) -> f64 {
    (0..n.t11.len())
        .map(|i| sym2_eigenvalues([n.t11[i] + k, n.t22[i] + k, n.t12[i]]).0)
        .fold(f64::INFINITY, f64::min)
}

/// 3D symmetric tensor stored as `(t11, t22, t33, t23, t13, t12)`.
pub type Sym3 = [f64; 6];

pub const VOIGT3: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

#[inline]
pub fn sym3_get(t: &Sym3, a: usize, b: usize) -> f64 {
    match (a.min(b), a.max(b)) {
        (0, 0) => t[0],
        (1, 1) => t[1],
        (2, 2) => t[2],
        (1, 2) => t[3],
        (0, 2) => t[4],
        _ => t[5],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor3D {
    pub mandel: Matrix6<f64>,
}

impl Tensor3D {
    pub fn from_index_fn(t: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut m = Matrix6::zeros();
        for (p, &(a, b)) in VOIGT3.iter().enumerate() {
            for (q, &(c, d)) in VOIGT3.iter().enumerate() {
                let f = if p >= 3 { SQRT2 } else { 1.0 } * if q >= 3 { SQRT2 } else { 1.0 };
                m[(p, q)] = f * t(a, b, c, d);
            }
        }
        Self { mandel: m }
    }

    pub fn identity() -> Self {
        Self { mandel: Matrix6::identity() }
    }

    /// From a symmetric 6x6 Mandel matrix given by rows.
    pub fn from_mandel_rows(rows: &[[f64; 6]; 6]) -> Result<Self> {
        let m = Matrix6::from_fn(|i, j| rows[i][j]);
        let asym = (m - m.transpose()).abs().max();
        if asym > 1e-12 * (1.0 + m.abs().max()) || m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter { name: "mandel", reason: format!("matrix must be finite and symmetric (asymmetry {asym:.3e})") });
        }
        Ok(Self { mandel: m })
    }

    /// `H_{ijkl} = lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk)`.
    pub fn isotropic(lambda: f64, mu: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("mu", mu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter { name, reason: format!("must be positive, got {v}") });
            }
        }
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Ok(Self::from_index_fn(|i, j, k, l| lambda * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k))))
    }

    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let pos = |a: usize, b: usize| VOIGT3.iter().position(|&(x, y)| (x, y) == (a.min(b), a.max(b))).unwrap();
        let (p, q) = (pos(i, j), pos(k, l));
        let f = if p >= 3 { SQRT2 } else { 1.0 } * if q >= 3 { SQRT2 } else { 1.0 };
        self.mandel[(p, q)] / f
    }

    #[inline]
    pub fn apply(&self, e: &Sym3) -> Sym3 {
        let mut v = [0.0; 6];
        for p in 0..6 {
            v[p] = if p >= 3 { SQRT2 * e[p] } else { e[p] };
        }
        let mut s = [0.0; 6];
        for p in 0..6 {
            let mut acc = 0.0;
            for q in 0..6 {
                acc += self.mandel[(p, q)] * v[q];
            }
            s[p] = if p >= 3 { acc / SQRT2 } else { acc };
        }
        s
    }

    /// Full contraction `A : B` of two symmetric 3x3 tensors.
    #[inline]
    pub fn ddot(a: &Sym3, b: &Sym3) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    pub fn quad(&self, e: &Sym3) -> f64 {
        Self::ddot(&self.apply(e), e)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.mandel).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .mandel
            .try_inverse()
            .ok_or_else(|| Error::Inversion("singular 3D tensor".into()))?;
        Ok(Self { mandel: (inv + inv.transpose()) * 0.5 })
    }
}
