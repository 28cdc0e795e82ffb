use serde::{Deserialize, Serialize};

use super::{ElasticLoads, ElasticProblem};
use nalgebra::{Matrix3, SymmetricEigen};

use crate::constitutive::{sym3_get, Sym3, Tensor3D, VOIGT3};
use crate::error::{Error, Result};
use crate::fields::{sbp_diff1_3, BoundaryPart, Grid3};
use crate::plate::certificate::symmetric_potential;
use crate::rng::{sample_rng, uniform_vec};
use crate::solver::Objective;

/// `T = T~ + C delta` with `div T = -P` on free nodes. `T~` is diagonal when
/// every axis is anchored by the clamped faces; otherwise the loads of the
/// unanchored components enter through off-diagonal entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate3 {
    pub t: Vec<Sym3>,
    pub c_shift: f64,
    pub min_eigenvalue: f64,
    pub delta_pd: f64,
    pub div_residual: f64,
    pub tol_div: f64,
}

impl Certificate3 {
    pub fn node(&self, k: usize) -> Sym3 {
        self.t[k]
    }

    /// Component `T_ab` as a field.
    pub fn component(&self, a: usize, b: usize) -> Vec<f64> {
        self.t.iter().map(|t| sym3_get(t, a, b)).collect()
    }
}

fn sym3_min_eigenvalue(t: &Sym3) -> f64 {
    let m = Matrix3::from_fn(|a, b| sym3_get(t, a, b));
    SymmetricEigen::new(m).eigenvalues.min()
}

pub fn build_t3d(loads: &ElasticLoads, delta_pd: f64) -> Result<Certificate3> {
    if !(delta_pd > 0.0) {
        return Err(Error::Parameter { name: "delta_pd", reason: "must be positive".into() });
    }
    let g = loads.grid();
    let free: Vec<bool> = g.clamp_mask().iter().map(|c| !c).collect();
    let p: Vec<&[f64]> = loads.p.iter().map(|f| f.values.as_slice()).collect();
    let h: Vec<f64> = (0..3).map(|a| g.spacing(a)).collect();
    let pt = symmetric_potential(&p, &g.shape(), &h, &free)?;
    let mut t: Vec<Sym3> = (0..g.len()).map(|k| std::array::from_fn(|q| pt[VOIGT3[q].0][VOIGT3[q].1][k])).collect();
    let min_tilde = t.iter().map(sym3_min_eigenvalue).fold(f64::INFINITY, f64::min);
    let c_shift = (-min_tilde).max(0.0) + delta_pd;
    for v in t.iter_mut() {
        (0..3).for_each(|a| v[a] += c_shift);
    }
    let min_eigenvalue = t.iter().map(sym3_min_eigenvalue).fold(f64::INFINITY, f64::min);
    let cert = Certificate3 { t, c_shift, min_eigenvalue, delta_pd, div_residual: 0.0, tol_div: 0.0 };
    let tol_div = 1e-8 * (1.0 + loads.max_abs_body());
    let div = cert.divergence(&g);
    let mut div_residual: f64 = 0.0;
    for a in 0..3 {
        for k in (0..g.len()).filter(|&k| free[k]) {
            div_residual = div_residual.max((div[a][k] + loads.p[a].values[k]).abs());
        }
    }
    if div_residual > tol_div {
        return Err(Error::Certificate(format!("divergence residual {div_residual:.3e} exceeds {tol_div:.3e}")));
    }
    if min_eigenvalue < delta_pd * (1.0 - 1e-12) {
        return Err(Error::Certificate(format!("min eigenvalue {min_eigenvalue:.3e} below {delta_pd:.3e}")));
    }
    Ok(Certificate3 { div_residual, tol_div, ..cert })
}

impl Certificate3 {
    /// `(div T)_a = sum_b G_b T_ab`.
    pub fn divergence(&self, g: &Grid3) -> [Vec<f64>; 3] {
        std::array::from_fn(|a| {
            let mut out = vec![0.0; g.len()];
            for b in 0..3 {
                for (o, d) in out.iter_mut().zip(sbp_diff1_3(&self.component(a, b), g, b)) {
                    *o += d;
                }
            }
            out
        })
    }
}

/// Terms of the energy rewritten through `T`:
/// `J = [1/2 H:v:v - T:v] + 1/2 T:(grad u^T grad u) + <u, T n> - <Pt, u> - <P + div T, u>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transcript3 {
    pub strain_minus_t: f64,
    pub t_gradient: f64,
    pub boundary_flux: f64,
    pub traction: f64,
    pub load_remainder: f64,
    /// Sum of the terms above; equals `direct` up to rounding.
    pub bound: f64,
    pub direct: f64,
    /// `strain_minus_t + t_gradient`, bounded below by `floor`.
    pub proof_expression: f64,
    /// `-1/2 int T : H^{-1} : T`.
    pub floor: f64,
}

pub fn coercivity_transcript(problem: &ElasticProblem, cert: &Certificate3, x: &[f64]) -> Result<Transcript3> {
    let g = problem.grid;
    let n = problem.n();
    let w = &problem.weights;
    let hinv = problem.h.inverse()?;
    let d = problem.displacement_gradient(x);
    let v = problem.strain(x);
    let (mut smt, mut tg, mut floor) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let t = cert.node(k);
        smt += w[k] * (0.5 * problem.h.quad(&v[k]) - Tensor3D::ddot(&t, &v[k]));
        for a in 0..3 {
            for b in 0..3 {
                tg += 0.5 * w[k] * sym3_get(&t, a, b) * (0..3).map(|m| d[m][a][k] * d[m][b][k]).sum::<f64>();
            }
        }
        floor -= 0.5 * w[k] * hinv.quad(&t);
    }
    let normals = g.weighted_normals(BoundaryPart::All);
    let (mut flux, mut rem) = (0.0, 0.0);
    let div = cert.divergence(&g);
    for a in 0..3 {
        for k in 0..n {
            let u = x[a * n + k];
            flux += (0..3).map(|b| normals[b][k] * sym3_get(&cert.t[k], a, b)).sum::<f64>() * u;
            rem -= w[k] * (problem.loads.p[a].values[k] + div[a][k]) * u;
        }
    }
    let traction = -problem.work(x).1;
    Ok(Transcript3 {
        strain_minus_t: smt,
        t_gradient: tg,
        boundary_flux: flux,
        traction,
        load_remainder: rem,
        bound: smt + tg + flux + traction + rem,
        direct: problem.value(x),
        proof_expression: smt + tg,
        floor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorHypotheses {
    /// Smallest eigenvalue of the 6x6 matrix.
    pub c0: f64,
    /// Smallest sampled `H : t^2 : t^2 / sum t_ij^4`.
    pub c1_worst_ratio: f64,
    pub samples: usize,
}

pub fn check_tensor_hypotheses(h: &Tensor3D, samples: usize, seed: u64) -> Result<TensorHypotheses> {
    let c0 = h.min_eigenvalue();
    if !(c0 > 0.0) {
        return Err(Error::Hypothesis(format!("smallest eigenvalue {c0:.3e} is not positive")));
    }
    let mut worst = f64::INFINITY;
    for s in 0..samples {
        let r = uniform_vec(&mut sample_rng(seed, s as u64), 6, 1.0);
        let t: Sym3 = [r[0], r[1], r[2], r[3], r[4], r[5]];
        let get = |a: usize, b: usize| sym3_get(&t, a, b);
        let sq: Sym3 = std::array::from_fn(|p| {
            let (a, b) = VOIGT3[p];
            (0..3).map(|m| get(m, a) * get(m, b)).sum()
        });
        let quart: f64 = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).map(|(a, b)| get(a, b).powi(4)).sum();
        if quart > 0.0 {
            worst = worst.min(h.quad(&sq) / quart);
        }
    }
    if !(worst > 0.0) {
        return Err(Error::Hypothesis(format!("quartic ratio {worst:.3e} is not positive")));
    }
    Ok(TensorHypotheses { c0, c1_worst_ratio: worst, samples })
}
