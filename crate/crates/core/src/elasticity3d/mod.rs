//! Geometrically nonlinear 3D elasticity on a box: energy, exact gradient,
//! quartic line increments, and the positive-definite `T` certificate.
//!
//! The strain is `v_ij = (u_i,j + u_j,i)/2 + u_m,i u_m,j / 2`, evaluated
//! nodewise with SBP first differences. Degrees of freedom are laid out as
//! `[u1 | u2 | u3]`.

mod certificate;

use serde::{Deserialize, Serialize};

use crate::constitutive::{sym3_get, Sym3, Tensor3D, VOIGT3};
use crate::error::{Error, Result};
use crate::fields::{sbp_diff1_3, sbp_diff1_3_transpose, BoundaryLabel, BoundaryPart, Grid3, ScalarField3};
use crate::solver::Objective;

pub use certificate::{
    build_t3d, check_tensor_hypotheses, coercivity_transcript, Certificate3, TensorHypotheses, Transcript3,
};

/// Default per-axis node cap for 3D runs.
pub const DEFAULT_GRID_CAP: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElasticMode {
    Clamped,
    Mixed,
}

impl ElasticMode {
    pub fn check_grid(self, grid: &Grid3) -> Result<()> {
        let has_t = grid.faces.0.contains(&BoundaryLabel::GammaT);
        match self {
            ElasticMode::Clamped if has_t => Err(Error::Config("clamped mode requires every face to be clamped".into())),
            ElasticMode::Mixed if !has_t => Err(Error::Config("mixed mode requires at least one traction face".into())),
            _ => Ok(()),
        }
    }
}

pub fn check_grid_cap(grid: &Grid3, cap: usize) -> Result<()> {
    let m = grid.nx.max(grid.ny).max(grid.nz);
    if m > cap {
        return Err(Error::Grid(format!("3D grid has {m} nodes on an axis, cap is {cap}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticState {
    pub u: [ScalarField3; 3],
}

impl ElasticState {
    pub fn zeros(grid: Grid3) -> Self {
        Self { u: std::array::from_fn(|_| ScalarField3::zeros(grid)) }
    }

    pub fn grid(&self) -> Grid3 {
        self.u[0].grid
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.u.iter().flat_map(|f| f.values.iter().copied()).collect()
    }

    pub fn from_vec(grid: Grid3, x: &[f64]) -> Result<Self> {
        let n = grid.len();
        if x.len() != 3 * n {
            return Err(Error::Grid(format!("state vector has length {}, expected {}", x.len(), 3 * n)));
        }
        Ok(Self { u: std::array::from_fn(|c| ScalarField3 { grid, values: x[c * n..(c + 1) * n].to_vec() }) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensorField3 {
    pub grid: Grid3,
    pub values: Vec<Sym3>,
}

/// Body loads `P`, traction `Pt` (read on traction faces only) and the
/// Dirichlet data `u_hat` (read on clamped faces only, mixed mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticLoads {
    pub p: [ScalarField3; 3],
    pub pt: [ScalarField3; 3],
    pub u_hat: [ScalarField3; 3],
}

impl ElasticLoads {
    pub fn zeros(grid: Grid3) -> Self {
        let z = || std::array::from_fn(|_| ScalarField3::zeros(grid));
        Self { p: z(), pt: z(), u_hat: z() }
    }

    pub fn body(grid: Grid3, p: [f64; 3]) -> Self {
        let mut l = Self::zeros(grid);
        for c in 0..3 {
            l.p[c].values.iter_mut().for_each(|v| *v = p[c]);
        }
        l
    }

    pub fn grid(&self) -> Grid3 {
        self.p[0].grid
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid();
        for f in self.p.iter().chain(&self.pt).chain(&self.u_hat) {
            if f.grid != g || f.values.len() != g.len() {
                return Err(Error::Grid("load fields live on different grids".into()));
            }
            if f.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parameter { name: "loads", reason: "non-finite value".into() });
            }
        }
        Ok(())
    }

    pub fn max_abs_body(&self) -> f64 {
        self.p.iter().flat_map(|f| f.values.iter()).fold(0.0, |a, v| a.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticBreakdown {
    pub strain: f64,
    /// `<P, u>` over the domain.
    pub work: f64,
    /// `<Pt, u>` over traction faces.
    pub traction: f64,
    pub total: f64,
}

/// Displacement gradient `d[m][j] = u_m,j`.
pub type DisplacementGradient = [[Vec<f64>; 3]; 3];

#[inline]
fn node_grad(d: &DisplacementGradient, k: usize) -> [[f64; 3]; 3] {
    std::array::from_fn(|m| std::array::from_fn(|j| d[m][j][k]))
}

#[inline]
fn strain_at(d: &[[f64; 3]; 3]) -> Sym3 {
    std::array::from_fn(|p| {
        let (a, b) = VOIGT3[p];
        0.5 * (d[a][b] + d[b][a]) + 0.5 * (0..3).map(|m| d[m][a] * d[m][b]).sum::<f64>()
    })
}

#[derive(Debug, Clone)]
pub struct ElasticProblem {
    pub grid: Grid3,
    pub h: Tensor3D,
    pub loads: ElasticLoads,
    pub mode: ElasticMode,
    pub weights: Vec<f64>,
    /// Traction-face quadrature weights (zero in clamped mode).
    pub boundary_w: Vec<f64>,
    metric: Vec<f64>,
    free: Vec<bool>,
}

impl ElasticProblem {
    pub fn new(h: Tensor3D, loads: ElasticLoads, mode: ElasticMode) -> Result<Self> {
        loads.validate()?;
        let grid = loads.grid();
        mode.check_grid(&grid)?;
        let weights = grid.weights();
        let boundary_w = match mode {
            ElasticMode::Clamped => vec![0.0; grid.len()],
            ElasticMode::Mixed => grid.boundary_weights(BoundaryPart::GammaT),
        };
        let clamp = grid.clamp_mask();
        let free = (0..3).flat_map(|_| clamp.iter().map(|c| !c)).collect();
        let metric = (0..3).flat_map(|_| weights.iter().copied()).collect();
        Ok(Self { grid, h, loads, mode, weights, boundary_w, metric, free })
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    /// Dirichlet data on clamped nodes (zero in clamped mode).
    pub fn dirichlet(&self) -> Vec<f64> {
        match self.mode {
            ElasticMode::Clamped => vec![0.0; 3 * self.n()],
            ElasticMode::Mixed => self.loads.u_hat.iter().flat_map(|f| f.values.iter().copied()).collect(),
        }
    }

    /// Starting iterate: the Dirichlet data extended over the whole box.
    pub fn initial_state(&self) -> Vec<f64> {
        self.dirichlet()
    }

    pub fn boundary_violation(&self, x: &[f64]) -> f64 {
        let hat = self.dirichlet();
        (0..x.len()).filter(|&i| !self.free[i]).map(|i| (x[i] - hat[i]).abs()).fold(0.0, f64::max)
    }

    pub fn check_state(&self, u: &ElasticState) -> Result<()> {
        if u.grid() != self.grid {
            return Err(Error::Config("state grid differs from the load grid".into()));
        }
        let v = self.boundary_violation(&u.to_vec());
        if v > 1e-12 {
            return Err(Error::Config(format!("state violates the boundary condition by {v:.3e}")));
        }
        Ok(())
    }

    pub fn displacement_gradient(&self, x: &[f64]) -> DisplacementGradient {
        let n = self.n();
        std::array::from_fn(|m| std::array::from_fn(|j| sbp_diff1_3(&x[m * n..(m + 1) * n], &self.grid, j)))
    }

    pub fn strain(&self, x: &[f64]) -> Vec<Sym3> {
        let d = self.displacement_gradient(x);
        (0..self.n()).map(|k| strain_at(&node_grad(&d, k))).collect()
    }

    /// Returns `(<P, x>, <Pt, x>_traction)`.
    pub fn work(&self, x: &[f64]) -> (f64, f64) {
        let n = self.n();
        let (mut w, mut t) = (0.0, 0.0);
        for c in 0..3 {
            for k in 0..n {
                w += self.weights[k] * self.loads.p[c].values[k] * x[c * n + k];
                t += self.boundary_w[k] * self.loads.pt[c].values[k] * x[c * n + k];
            }
        }
        (w, t)
    }

    pub fn breakdown(&self, x: &[f64]) -> ElasticBreakdown {
        let v = self.strain(x);
        let strain: f64 = v.iter().zip(&self.weights).map(|(e, w)| 0.5 * w * self.h.quad(e)).sum();
        let (work, traction) = self.work(x);
        ElasticBreakdown { strain, work, traction, total: strain - work - traction }
    }

    /// `g_a = sum_b G_b^T (W (F S)_ab) - W P_a - B Pt_a` with `F = I + grad u`
    /// and `S = H : v`.
    pub fn full_gradient(&self, x: &[f64], g: &mut [f64]) {
        let n = self.n();
        let d = self.displacement_gradient(x);
        let mut fs: [[Vec<f64>; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| vec![0.0; n]));
        for k in 0..n {
            let dk = node_grad(&d, k);
            let s = self.h.apply(&strain_at(&dk));
            for a in 0..3 {
                for b in 0..3 {
                    let mut acc = sym3_get(&s, a, b);
                    for j in 0..3 {
                        acc += dk[a][j] * sym3_get(&s, j, b);
                    }
                    fs[a][b][k] = self.weights[k] * acc;
                }
            }
        }
        for a in 0..3 {
            let out = &mut g[a * n..(a + 1) * n];
            out.iter_mut().for_each(|v| *v = 0.0);
            for (b, f) in fs[a].iter().enumerate() {
                for (o, t) in out.iter_mut().zip(sbp_diff1_3_transpose(f, &self.grid, b)) {
                    *o += t;
                }
            }
            for k in 0..n {
                out[k] -= self.weights[k] * self.loads.p[a].values[k] + self.boundary_w[k] * self.loads.pt[a].values[k];
            }
        }
    }

    /// Coefficients `[c1, c2, c3, c4]` of `J(x + t d) - J(x)`.
    pub fn line_polynomial(&self, x: &[f64], dir: &[f64]) -> [f64; 4] {
        let d = self.displacement_gradient(x);
        let e = self.displacement_gradient(dir);
        let mut c = [0.0; 4];
        for k in 0..self.n() {
            let (dk, ek) = (node_grad(&d, k), node_grad(&e, k));
            let v0 = strain_at(&dk);
            let v1: Sym3 = std::array::from_fn(|p| {
                let (a, b) = VOIGT3[p];
                0.5 * (ek[a][b] + ek[b][a]) + 0.5 * (0..3).map(|m| dk[m][a] * ek[m][b] + ek[m][a] * dk[m][b]).sum::<f64>()
            });
            let v2: Sym3 = std::array::from_fn(|p| {
                let (a, b) = VOIGT3[p];
                0.5 * (0..3).map(|m| ek[m][a] * ek[m][b]).sum::<f64>()
            });
            let (h0, h1, h2) = (self.h.apply(&v0), self.h.apply(&v1), self.h.apply(&v2));
            let w = self.weights[k];
            c[0] += w * Tensor3D::ddot(&h0, &v1);
            c[1] += w * (0.5 * Tensor3D::ddot(&h1, &v1) + Tensor3D::ddot(&h0, &v2));
            c[2] += w * Tensor3D::ddot(&h1, &v2);
            c[3] += w * 0.5 * Tensor3D::ddot(&h2, &v2);
        }
        let (w, t) = self.work(dir);
        c[0] -= w + t;
        c
    }
}

impl Objective for ElasticProblem {
    fn dim(&self) -> usize {
        3 * self.n()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.breakdown(x).total
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        self.full_gradient(x, g)
    }

    fn line_delta(&self, x: &[f64], d: &[f64], t: f64) -> f64 {
        let c = self.line_polynomial(x, d);
        t * (c[0] + t * (c[1] + t * (c[2] + t * c[3])))
    }

    fn metric(&self) -> &[f64] {
        &self.metric
    }

    fn free(&self) -> &[bool] {
        &self.free
    }
}

/// Nodewise strain `v(u)`.
pub fn strain_v(u: &ElasticState) -> SymTensorField3 {
    let grid = u.grid();
    let x = u.to_vec();
    let n = grid.len();
    let d: DisplacementGradient =
        std::array::from_fn(|m| std::array::from_fn(|j| sbp_diff1_3(&x[m * n..(m + 1) * n], &grid, j)));
    SymTensorField3 { grid, values: (0..n).map(|k| strain_at(&node_grad(&d, k))).collect() }
}

pub fn energy3d(u: &ElasticState, h: &Tensor3D, loads: &ElasticLoads, mode: ElasticMode) -> Result<ElasticBreakdown> {
    let p = ElasticProblem::new(*h, loads.clone(), mode)?;
    p.check_state(u)?;
    Ok(p.breakdown(&u.to_vec()))
}

/// Exact gradient of [`energy3d`] with clamped rows zeroed.
pub fn gradient3d(u: &ElasticState, h: &Tensor3D, loads: &ElasticLoads, mode: ElasticMode) -> Result<ElasticState> {
    let p = ElasticProblem::new(*h, loads.clone(), mode)?;
    p.check_state(u)?;
    ElasticState::from_vec(p.grid, &p.projected_gradient(&u.to_vec()))
}
