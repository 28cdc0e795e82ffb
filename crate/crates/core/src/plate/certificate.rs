//! Positive-definite tensor `T` with `div T = -P` and the lower bound it
//! yields for the plate energy.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::energy::PlateProblem;
use super::LoadSet;
use crate::constitutive::{invert_sym4, sym2_eigenvalues};
use crate::error::{Error, Result};
use crate::fields::stencil::{apply_axis, for_each_line, Stencil};
use crate::fields::{BoundaryPart, Grid2, SymTensorField2};
use crate::solver::Objective;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityCertificate {
    pub t: SymTensorField2,
    pub c_shift: f64,
    pub min_eigenvalue: f64,
    pub delta_pd: f64,
    /// Sup-norm of `div T + P` over nodes with free in-plane displacement.
    pub div_residual: f64,
    pub tol_div: f64,
}

/// Dense SBP difference matrix on `n` nodes.
pub(crate) fn sbp_matrix(n: usize, h: f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(n, n);
    g[(0, 0)] = -1.0 / h;
    g[(0, 1)] = 1.0 / h;
    for i in 1..n - 1 {
        g[(i, i - 1)] = -0.5 / h;
        g[(i, i + 1)] = 0.5 / h;
    }
    g[(n - 1, n - 2)] = -1.0 / h;
    g[(n - 1, n - 1)] = 1.0 / h;
    g
}

/// `-int_0^s p` by the cumulative trapezoid rule.
fn neg_cumtrapz(p: &[f64], h: f64) -> Vec<f64> {
    let mut t = vec![0.0; p.len()];
    for i in 1..p.len() {
        t[i] = t[i - 1] - 0.5 * h * (p[i - 1] + p[i]);
    }
    t
}

/// Solve `G t = -p` on the rows flagged in `rows`, starting from the
/// cumulative trapezoid and adding the minimum-norm correction.
pub(crate) fn line_certificate(p: &[f64], rows: &[bool], h: f64) -> Result<Vec<f64>> {
    let n = p.len();
    let t0 = neg_cumtrapz(p, h);
    let idx: Vec<usize> = (0..n).filter(|&i| rows[i]).collect();
    if idx.is_empty() {
        return Ok(t0);
    }
    let g = sbp_matrix(n, h);
    let a = DMatrix::from_fn(idx.len(), n, |r, c| g[(idx[r], c)]);
    let t0v = DVector::from_vec(t0.clone());
    let gt0 = &a * &t0v;
    let b = DVector::from_fn(idx.len(), |r, _| -p[idx[r]] - gt0[r]);
    let svd = a.svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    let delta = svd.solve(&b, tol).map_err(|e| Error::Certificate(format!("line solve failed: {e}")))?;
    Ok((0..n).map(|i| t0[i] + delta[i]).collect())
}

fn divergence_residual(t: &SymTensorField2, loads: &LoadSet, free_u: &[bool]) -> f64 {
    let ops = super::PlateOps::new(t.grid);
    let (a, b) = (ops.gx(&t.t11), ops.gy(&t.t12));
    let (c, d) = (ops.gx(&t.t12), ops.gy(&t.t22));
    (0..t.t11.len())
        .filter(|&k| free_u[k])
        .map(|k| (a[k] + b[k] + loads.p1.values[k]).abs().max((c[k] + d[k] + loads.p2.values[k]).abs()))
        .fold(0.0, f64::max)
}

/// Solve `G_axis t = -rhs` line by line on the flagged rows.
fn integrate_lines(rhs: &[f64], shape: &[usize], axis: usize, h: f64, free: &[bool]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; rhs.len()];
    let mut lines = Vec::new();
    for_each_line(shape, axis, |base, stride| lines.push((base, stride)));
    for (base, stride) in lines {
        let ks: Vec<usize> = (0..shape[axis]).map(|s| base + s * stride).collect();
        let p: Vec<f64> = ks.iter().map(|&k| rhs[k]).collect();
        let rows: Vec<bool> = ks.iter().map(|&k| free[k]).collect();
        for (v, &k) in line_certificate(&p, &rows, h)?.into_iter().zip(&ks) {
            out[k] = v;
        }
    }
    Ok(out)
}

/// Every line along `axis` contains a fixed node.
fn anchored(shape: &[usize], axis: usize, free: &[bool]) -> bool {
    let mut ok = true;
    for_each_line(shape, axis, |base, stride| {
        ok &= (0..shape[axis]).any(|s| !free[base + s * stride]);
    });
    ok
}

/// Symmetric `T~` (as `t[a][b]`) with `sum_b G_b T~_ab = -P_a` on free nodes.
///
/// Component `a` integrates along its own axis when every such line meets a
/// fixed node. Otherwise the free-free lines make `G t = -p` inconsistent, so
/// the load is routed through `T~_ac` along the first anchored axis `c`, and
/// `T~_cc` absorbs the extra `G_a T~_ac`.
pub(crate) fn symmetric_potential(p: &[&[f64]], shape: &[usize], h: &[f64], free: &[bool]) -> Result<Vec<Vec<Vec<f64>>>> {
    let d = shape.len();
    let n = free.len();
    let good: Vec<bool> = (0..d).map(|a| anchored(shape, a, free)).collect();
    let host = good
        .iter()
        .position(|&b| b)
        .ok_or_else(|| Error::Certificate("no axis whose lines all meet the clamped boundary".into()))?;
    let mut t = vec![vec![vec![0.0; n]; d]; d];
    for a in (0..d).filter(|&a| !good[a]) {
        let v = integrate_lines(p[a], shape, host, h[host], free)?;
        t[host][a] = v.clone();
        t[a][host] = v;
    }
    for a in (0..d).filter(|&a| good[a]) {
        let mut rhs = p[a].to_vec();
        for b in (0..d).filter(|&b| b != a) {
            for (r, g) in rhs.iter_mut().zip(apply_axis(&t[a][b], shape, b, h[b], Stencil::Sbp)) {
                *r += g;
            }
        }
        t[a][a] = integrate_lines(&rhs, shape, a, h[a], free)?;
    }
    Ok(t)
}

/// Build `T = T~ + C delta` from [`symmetric_potential`] and verify both the
/// divergence and the eigenvalue margin. For clamped plates `T~11 = -int P1 dx`,
/// `T~22 = -int P2 dy` and `T~12 = 0`.
pub fn build_t_field(loads: &LoadSet, delta_pd: f64) -> Result<CoercivityCertificate> {
    if !(delta_pd > 0.0) {
        return Err(Error::Parameter { name: "delta_pd", reason: "must be positive".into() });
    }
    let g: Grid2 = loads.p.grid;
    let free_u: Vec<bool> = g.clamp_mask_inplane().iter().map(|f| !f).collect();
    let pt = symmetric_potential(&[&loads.p1.values, &loads.p2.values], &g.shape(), &[g.hx(), g.hy()], &free_u)?;
    let mut t = SymTensorField2::zeros(g);
    t.t11 = pt[0][0].clone();
    t.t22 = pt[1][1].clone();
    t.t12 = pt[0][1].clone();
    let min_tilde = (0..g.len()).map(|k| sym2_eigenvalues(t.node(k)).0).fold(f64::INFINITY, f64::min);
    let c_shift = (-min_tilde).max(0.0) + delta_pd;
    for k in 0..g.len() {
        t.t11[k] += c_shift;
        t.t22[k] += c_shift;
    }
    let min_eigenvalue = (0..g.len()).map(|k| sym2_eigenvalues(t.node(k)).0).fold(f64::INFINITY, f64::min);
    let pmax = loads.p1.max_abs().max(loads.p2.max_abs());
    let tol_div = 1e-8 * (1.0 + pmax);
    let div_residual = divergence_residual(&t, loads, &free_u);
    if div_residual > tol_div {
        return Err(Error::Certificate(format!("divergence residual {div_residual:.3e} exceeds {tol_div:.3e}")));
    }
    if min_eigenvalue < delta_pd * (1.0 - 1e-12) {
        return Err(Error::Certificate(format!("min eigenvalue {min_eigenvalue:.3e} below {delta_pd:.3e}")));
    }
    Ok(CoercivityCertificate { t, c_shift, min_eigenvalue, delta_pd, div_residual, tol_div })
}

/// Individual terms of the lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundDetail {
    pub hessian_term: f64,
    pub t_gradient_term: f64,
    pub load_term: f64,
    pub spring: f64,
    pub membrane_minus_t: f64,
    pub boundary_flux: f64,
    pub bound: f64,
}

/// `c ||w_ab||^2 + 1/2 <T, w_a w_b> - <u, f1> + springs + G1(v) - <T, v> + <T n, u>`
/// with `c` half the smallest eigenvalue of the bending tensor.
pub fn coercivity_lower_bound(problem: &PlateProblem, cert: &CoercivityCertificate, x: &[f64]) -> BoundDetail {
    let n = problem.n();
    let g = problem.ops.grid;
    let d = problem.ops.derivatives(x);
    let wts = &problem.ops.weights;
    let t = &cert.t;
    let c = 0.5 * problem.bending.min_eigenvalue();
    let mut hess = 0.0;
    let mut tgrad = 0.0;
    let mut mem = 0.0;
    for k in 0..n {
        hess += wts[k] * (d.wxx[k].powi(2) + d.wyy[k].powi(2) + 2.0 * d.wxy[k].powi(2));
        tgrad += wts[k] * (t.t11[k] * d.wx[k].powi(2) + t.t22[k] * d.wy[k].powi(2) + 2.0 * t.t12[k] * d.wx[k] * d.wy[k]);
        let v = d.gamma(k);
        let tv = t.t11[k] * v[0] + t.t22[k] * v[1] + 2.0 * t.t12[k] * v[2];
        mem += wts[k] * (0.5 * problem.membrane.quad(v) - tv);
    }
    let l = &problem.loads;
    let b = &problem.boundary_w;
    let load: f64 = (0..n)
        .map(|k| {
            wts[k] * l.p.values[k] * x[2 * n + k]
                + b[k] * (l.pt1.values[k] * x[k] + l.pt2.values[k] * x[n + k] + l.pt.values[k] * x[2 * n + k])
        })
        .sum();
    let (n1, n2) = match problem.mode {
        super::PlateMode::Clamped => (vec![0.0; n], vec![0.0; n]),
        super::PlateMode::Mixed => g.weighted_normals(BoundaryPart::GammaT),
    };
    let flux: f64 = (0..n)
        .map(|k| {
            let (a, bb) = (x[k], x[n + k]);
            n1[k] * (t.t11[k] * a + t.t12[k] * bb) + n2[k] * (t.t12[k] * a + t.t22[k] * bb)
        })
        .sum();
    let spring = problem.spring(x);
    let detail = BoundDetail {
        hessian_term: c * hess,
        t_gradient_term: 0.5 * tgrad,
        load_term: -load,
        spring,
        membrane_minus_t: mem,
        boundary_flux: flux,
        bound: 0.0,
    };
    BoundDetail {
        bound: detail.hessian_term + detail.t_gradient_term + detail.load_term + spring + mem + flux,
        ..detail
    }
}

/// `-1/2 int T : H^{-1} : T`, the minimum of `G1(v) - <T, v>` over all `v`.
pub fn coercivity_floor(problem: &PlateProblem, cert: &CoercivityCertificate) -> Result<f64> {
    let hinv = invert_sym4(&problem.membrane)?;
    Ok(-0.5 * problem.ops.integrate((0..problem.n()).map(|k| hinv.quad(cert.t.node(k)))))
}

impl CoercivityCertificate {
    /// `J(x) - bound(x)`; nonnegative up to rounding when the certificate holds.
    pub fn slack(&self, problem: &PlateProblem, x: &[f64]) -> f64 {
        problem.value(x) - coercivity_lower_bound(problem, self, x).bound
    }
}
