//! Dual point extraction and the dual functionals of the clamped plate.
//!
//! Divergences are the weighted adjoints of the difference operators used by
//! the primal energy (`Div = -W^{-1} G^T W`), so every integration by parts
//! between the primal and dual sides is exact on the grid.

mod c0;
mod checks;

use serde::{Deserialize, Serialize};

use crate::constitutive::{invert_sym4, nk_inverse_field, nk_margin, Tensor2D};
use crate::error::{Error, Result};
use crate::fields::{ScalarField2, SymTensorField2, VectorField2};
use crate::plate::{LoadSet, PlateMode, PlateOps, PlateProblem};

pub use c0::C0Operator;
pub use checks::{
    concavity_probe, duality_gap, equilibrium_residuals, select_k, stationarity, verify, weak_duality_probe,
    CheckOutcome, ConcavityReport, DualReport, KSelection, KPolicy, Stationarity, VerifyOptions, WeakDualityReport,
};

/// `v* = (N, Q, M~)` together with `z*` and the shift `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub n: SymTensorField2,
    pub q: VectorField2,
    pub m_tilde: SymTensorField2,
    pub z_star: ScalarField2,
    pub k: f64,
}

impl DualPoint {
    pub fn zeros(grid: crate::fields::Grid2, k: f64) -> Self {
        Self {
            n: SymTensorField2::zeros(grid),
            q: VectorField2::zeros(grid),
            m_tilde: SymTensorField2::zeros(grid),
            z_star: ScalarField2::zeros(grid),
            k,
        }
    }
}

/// Operators and tensors shared by every dual evaluation.
#[derive(Debug, Clone)]
pub struct DualContext {
    pub ops: PlateOps,
    pub membrane: Tensor2D,
    pub bending: Tensor2D,
    pub membrane_inv: Tensor2D,
    pub bending_inv: Tensor2D,
    pub loads: LoadSet,
    pub c0: C0Operator,
    pub free_u: Vec<bool>,
    pub free_w: Vec<bool>,
}

impl DualContext {
    pub fn new(problem: &PlateProblem, eps3: f64) -> Result<Self> {
        if problem.mode != PlateMode::Clamped {
            return Err(Error::Config("dual formulation is defined for the clamped plate only".into()));
        }
        let membrane_inv = invert_sym4(&problem.membrane)?;
        let bending_inv = invert_sym4(&problem.bending)?;
        let ops = problem.ops.clone();
        let g = ops.grid;
        Ok(Self {
            c0: C0Operator::new(ops.clone(), &bending_inv, eps3)?,
            free_u: g.clamp_mask_inplane().iter().map(|f| !f).collect(),
            free_w: g.clamp_mask_deflection().iter().map(|f| !f).collect(),
            membrane: problem.membrane,
            bending: problem.bending,
            membrane_inv,
            bending_inv,
            loads: problem.loads.clone(),
            ops,
        })
    }

    fn n(&self) -> usize {
        self.ops.n()
    }

    fn integrate(&self, f: impl Iterator<Item = f64>) -> f64 {
        self.ops.integrate(f)
    }

    /// `Div_b T_ab = -W^{-1} (Gx^T (W T_a1) + Gy^T (W T_a2))` for a symmetric field.
    pub fn div_tensor(&self, t: &SymTensorField2) -> [Vec<f64>; 2] {
        let w = &self.ops.weights;
        let wt = |v: &[f64]| -> Vec<f64> { v.iter().zip(w).map(|(a, b)| a * b).collect() };
        let (a11, a22, a12) = (wt(&t.t11), wt(&t.t22), wt(&t.t12));
        let r1 = (self.ops.gxt(&a11), self.ops.gyt(&a12));
        let r2 = (self.ops.gxt(&a12), self.ops.gyt(&a22));
        [
            (0..self.n()).map(|k| -(r1.0[k] + r1.1[k]) / w[k]).collect(),
            (0..self.n()).map(|k| -(r2.0[k] + r2.1[k]) / w[k]).collect(),
        ]
    }

    /// `Div_a Q_a`.
    pub fn div_vector(&self, q: &VectorField2) -> Vec<f64> {
        let w = &self.ops.weights;
        let a: Vec<f64> = q.x.iter().zip(w).map(|(v, s)| v * s).collect();
        let b: Vec<f64> = q.y.iter().zip(w).map(|(v, s)| v * s).collect();
        let (ta, tb) = (self.ops.gxt(&a), self.ops.gyt(&b));
        (0..self.n()).map(|k| -(ta[k] + tb[k]) / w[k]).collect()
    }

    /// `M_{ab,ab}` as the weighted adjoint of the Hessian.
    pub fn div2_tensor(&self, m: &SymTensorField2) -> Vec<f64> {
        let w = &self.ops.weights;
        let a: Vec<f64> = m.t11.iter().zip(w).map(|(v, s)| v * s).collect();
        let b: Vec<f64> = m.t22.iter().zip(w).map(|(v, s)| v * s).collect();
        let c: Vec<f64> = m.t12.iter().zip(w).map(|(v, s)| 2.0 * v * s).collect();
        let r = self.ops.hessian_t(&a, &b, &c);
        r.iter().zip(w).map(|(v, s)| v / s).collect()
    }

    /// Pointwise `hbar : (M~ + z* delta)`.
    pub fn bending_strain(&self, m_tilde: &SymTensorField2, z: &[f64]) -> SymTensorField2 {
        let mut e = SymTensorField2::zeros(self.ops.grid);
        for k in 0..self.n() {
            let s = m_tilde.node(k);
            e.set_node(k, self.bending_inv.apply([s[0] + z[k], s[1] + z[k], s[2]]));
        }
        e
    }
}

/// Dual point of a primal state: `N = H:gamma`, `Q = (N + K) grad w`,
/// `z* = -K w`, `M~ = h:(w_{,ab}) - z* delta`.
pub fn extract_dual(ctx: &DualContext, x: &[f64], k: f64) -> Result<DualPoint> {
    if !(k > 0.0) {
        return Err(Error::Parameter { name: "K", reason: format!("must be positive, got {k}") });
    }
    let g = ctx.ops.grid;
    let n = ctx.n();
    let d = ctx.ops.derivatives(x);
    let mut dp = DualPoint::zeros(g, k);
    for i in 0..n {
        let nn = ctx.membrane.apply(d.gamma(i));
        dp.n.set_node(i, nn);
        dp.q.x[i] = (nn[0] + k) * d.wx[i] + nn[2] * d.wy[i];
        dp.q.y[i] = nn[2] * d.wx[i] + (nn[1] + k) * d.wy[i];
        let z = -k * x[2 * n + i];
        dp.z_star.values[i] = z;
        let m = ctx.bending.apply([d.wxx[i], d.wyy[i], d.wxy[i]]);
        dp.m_tilde.set_node(i, [m[0] - z, m[1] - z, m[2]]);
    }
    nk_inverse_field(&dp.n, k)?;
    Ok(dp)
}

/// `1/2 int (M~ + z* delta) : hbar : (M~ + z* delta)`.
pub fn g1_star(ctx: &DualContext, m_tilde: &SymTensorField2, z: &[f64]) -> f64 {
    0.5 * ctx.integrate((0..ctx.n()).map(|k| {
        let s = m_tilde.node(k);
        ctx.bending_inv.quad([s[0] + z[k], s[1] + z[k], s[2]])
    }))
}

/// `1/2 int (N + K)^{-1} Q.Q + 1/2 int N : Hbar : N`.
pub fn g2_star(ctx: &DualContext, n: &SymTensorField2, q: &VectorField2, k: f64) -> Result<f64> {
    let inv = nk_inverse_field(n, k)?;
    Ok(0.5 * ctx.integrate((0..ctx.n()).map(|i| {
        let (a, b) = (q.x[i], q.y[i]);
        inv.t11[i] * a * a + 2.0 * inv.t12[i] * a * b + inv.t22[i] * b * b + ctx.membrane_inv.quad(n.node(i))
    })))
}

/// `1/(2K) int |grad z*|^2`.
pub fn f_star(ctx: &DualContext, z: &[f64], k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Parameter { name: "K", reason: format!("must be positive, got {k}") });
    }
    let (zx, zy) = (ctx.ops.gx(z), ctx.ops.gy(z));
    Ok(ctx.integrate((0..ctx.n()).map(|i| zx[i] * zx[i] + zy[i] * zy[i])) / (2.0 * k))
}

/// `-G1* - G2* + F*`.
pub fn j_star(ctx: &DualContext, dp: &DualPoint) -> Result<f64> {
    let z = &dp.z_star.values;
    Ok(-g1_star(ctx, &dp.m_tilde, z) - g2_star(ctx, &dp.n, &dp.q, dp.k)? + f_star(ctx, z, dp.k)?)
}

/// `(hbar_{11lm}(M~ + z* delta)_{lm})_{,22} - (hbar_{22lm}(M~ + z* delta)_{lm})_{,11}`.
pub fn l_operator(ctx: &DualContext, m_tilde: &SymTensorField2, z: &[f64]) -> Vec<f64> {
    let e = ctx.bending_strain(m_tilde, z);
    let a = ctx.ops.gy(&ctx.ops.gy(&e.t11));
    let b = ctx.ops.gx(&ctx.ops.gx(&e.t22));
    a.iter().zip(&b).map(|(p, q)| p - q).collect()
}

/// `J* + 1/2 int C0(L) L`.
pub fn j1_star(ctx: &DualContext, dp: &DualPoint) -> Result<f64> {
    let l = l_operator(ctx, &dp.m_tilde, &dp.z_star.values);
    Ok(j_star(ctx, dp)? + ctx.c0.half_quadratic(&l))
}

/// `-1/2 int hbar (z* delta)(z* delta) + 1/2 int C0(L0) L0 + F*(z*)`.
pub fn j2_star(ctx: &DualContext, z: &[f64], k: f64) -> Result<f64> {
    let zero = SymTensorField2::zeros(ctx.ops.grid);
    let l0 = l_operator(ctx, &zero, z);
    Ok(-g1_star(ctx, &zero, z) + ctx.c0.half_quadratic(&l0) + f_star(ctx, z, k)?)
}

/// Membrane and moment residual fields `(Div N + P_a, Div2 M~ - Div Q - P)`.
pub fn residual_fields(ctx: &DualContext, dp: &DualPoint) -> ([Vec<f64>; 2], Vec<f64>) {
    let l = &ctx.loads;
    let [d1, d2] = ctx.div_tensor(&dp.n);
    let r1 = d1.iter().zip(&l.p1.values).map(|(a, b)| a + b).collect();
    let r2 = d2.iter().zip(&l.p2.values).map(|(a, b)| a + b).collect();
    let m = ctx.div2_tensor(&dp.m_tilde);
    let q = ctx.div_vector(&dp.q);
    let rm = (0..ctx.n()).map(|k| m[k] - q[k] - l.p.values[k]).collect();
    ([r1, r2], rm)
}

/// Lagrangian `J* + <w, Div2 M~ - Div Q - P> - <u_a, Div N + P_a>`.
pub fn j3_star(ctx: &DualContext, dp: &DualPoint, x: &[f64]) -> Result<f64> {
    let n = ctx.n();
    let ([r1, r2], rm) = residual_fields(ctx, dp);
    let mult = ctx.integrate((0..n).map(|k| x[2 * n + k] * rm[k] - x[k] * r1[k] - x[n + k] * r2[k]));
    Ok(j_star(ctx, dp)? + mult)
}

/// Smallest eigenvalue of `N + K delta` over the grid.
pub fn bstar_margin(dp: &DualPoint) -> f64 {
    nk_margin(&dp.n, dp.k)
}

#[cfg(test)]
mod tests;
