//! Reference minimizer for cross-checking the plate solver.
//!
//! Cyclic coordinate descent with exact one-dimensional minimization. The
//! energy change caused by moving one degree of freedom is recomputed from
//! explicit node stencils over the affected patch only, independently of the
//! field-wide operators used by the main solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plate::{PlateMode, PlateProblem};
use crate::solver::Objective;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub sweeps: usize,
    pub converged: bool,
}

struct Local<'a> {
    p: &'a PlateProblem,
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
}

impl Local<'_> {
    /// SBP first difference of `f` along x at `(i, j)`.
    fn dx(&self, f: &dyn Fn(usize, usize) -> f64, i: usize, j: usize) -> f64 {
        if i == 0 {
            (f(1, j) - f(0, j)) / self.hx
        } else if i == self.nx - 1 {
            (f(i, j) - f(i - 1, j)) / self.hx
        } else {
            (f(i + 1, j) - f(i - 1, j)) / (2.0 * self.hx)
        }
    }

    fn dy(&self, f: &dyn Fn(usize, usize) -> f64, i: usize, j: usize) -> f64 {
        if j == 0 {
            (f(i, 1) - f(i, 0)) / self.hy
        } else if j == self.ny - 1 {
            (f(i, j) - f(i, j - 1)) / self.hy
        } else {
            (f(i, j + 1) - f(i, j - 1)) / (2.0 * self.hy)
        }
    }

    /// Weighted strain-energy density at node `(i, j)`.
    fn density(&self, x: &[f64], i: usize, j: usize) -> f64 {
        let n = self.nx * self.ny;
        let at = |c: usize| move |a: usize, b: usize| x[c * n + a + self.nx * b];
        let (u1, u2, w) = (at(0), at(1), at(2));
        let wx = |a: usize, b: usize| self.dx(&w, a, b);
        let wy = |a: usize, b: usize| self.dy(&w, a, b);
        let (gx, gy) = (wx(i, j), wy(i, j));
        let e11 = self.dx(&u1, i, j) + 0.5 * gx * gx;
        let e22 = self.dy(&u2, i, j) + 0.5 * gy * gy;
        let e12 = 0.5 * (self.dy(&u1, i, j) + self.dx(&u2, i, j)) + 0.5 * gx * gy;
        let kxx = -self.dx(&wx, i, j);
        let kyy = -self.dy(&wy, i, j);
        let kxy = -self.dx(&wy, i, j);
        let k = i + self.nx * j;
        self.p.ops.weights[k]
            * 0.5
            * (self.p.membrane.quad([e11, e22, e12]) + self.p.bending.quad([kxx, kyy, kxy]))
    }

    /// Energy of the patch influenced by degree of freedom `dof`.
    fn patch_energy(&self, x: &[f64], dof: usize) -> f64 {
        let n = self.nx * self.ny;
        let (c, node) = (dof / n, dof % n);
        let (i, j) = (node % self.nx, node / self.nx);
        let mut e = 0.0;
        for b in j.saturating_sub(2)..(j + 3).min(self.ny) {
            for a in i.saturating_sub(2)..(i + 3).min(self.nx) {
                e += self.density(x, a, b);
            }
        }
        let l = &self.p.loads;
        let load = [&l.p1, &l.p2, &l.p][c].values[node];
        e - self.p.ops.weights[node] * load * x[dof]
    }
}

/// Minimizer of `c1 t + c2 t^2 + c3 t^3 + c4 t^4` by safeguarded Newton from 0.
fn quartic_argmin(c: [f64; 4]) -> f64 {
    let q = |t: f64| t * (c[0] + t * (c[1] + t * (c[2] + t * c[3])));
    let dq = |t: f64| c[0] + t * (2.0 * c[1] + t * (3.0 * c[2] + t * 4.0 * c[3]));
    let ddq = |t: f64| 2.0 * c[1] + t * (6.0 * c[2] + t * 12.0 * c[3]);
    let mut t = 0.0;
    for _ in 0..50 {
        let (g, h) = (dq(t), ddq(t));
        let mut step = if h > 0.0 { -g / h } else { -g.signum() * (t.abs() + 1e-8) };
        while q(t + step) > q(t) && step.abs() > 1e-300 {
            step *= 0.5;
        }
        t += step;
        if step.abs() <= 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    if q(t) < 0.0 {
        t
    } else {
        0.0
    }
}

/// Cyclic coordinate descent until the mass-scaled gradient norm drops below
/// `grad_tol` or `max_sweeps` is reached.
pub fn coordinate_descent(problem: &PlateProblem, x0: &[f64], grad_tol: f64, max_sweeps: usize) -> Result<OracleResult> {
    if problem.mode != PlateMode::Clamped {
        return Err(Error::Config("the coordinate-descent oracle supports clamped plates only".into()));
    }
    let g = problem.ops.grid;
    let loc = Local { p: problem, nx: g.nx, ny: g.ny, hx: g.hx(), hy: g.hy() };
    let mut x = x0.to_vec();
    let free: Vec<usize> = (0..problem.dim()).filter(|&i| problem.free()[i]).collect();
    let gnorm = |x: &[f64]| problem.grad_norm(&problem.projected_gradient(x));
    let mut sweeps = 0;
    let mut gn = gnorm(&x);
    while gn > grad_tol && sweeps < max_sweeps {
        for &dof in free.iter().chain(free.iter().rev()) {
            let x0v = x[dof];
            let s = 1e-3 * (1.0 + x0v.abs());
            let e0 = loc.patch_energy(&x, dof);
            let mut f = [0.0; 4];
            for (slot, m) in f.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
                x[dof] = x0v + m * s;
                *slot = loc.patch_energy(&x, dof) - e0;
            }
            // exact quartic through t = -2s, -s, 0, s, 2s
            let (fm2, fm1, fp1, fp2) = (f[0], f[1], f[2], f[3]);
            let c1 = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * s);
            let c2 = (16.0 * (fp1 + fm1) - (fp2 + fm2)) / (24.0 * s * s);
            let c3 = ((fp2 - fm2) - 2.0 * (fp1 - fm1)) / (12.0 * s * s * s);
            let c4 = ((fp2 + fm2) - 4.0 * (fp1 + fm1)) / (24.0 * s.powi(4));
            x[dof] = x0v + quartic_argmin([c1, c2, c3, c4]);
        }
        sweeps += 1;
        if sweeps % 20 == 0 {
            gn = gnorm(&x);
        }
    }
    gn = gnorm(&x);
    Ok(OracleResult { value: problem.value(&x), grad_norm: gn, sweeps, converged: gn <= grad_tol, x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_minimizer() {
        assert!((quartic_argmin([-2.0, 1.0, 0.0, 0.0]) - 1.0).abs() < 1e-14);
        // t^4 - 2 t^2 has minima at +-1; Newton from 0 must escape the maximum
        let t = quartic_argmin([0.0, -2.0, 0.0, 1.0]);
        assert!((t.abs() - 1.0).abs() < 1e-12);
        assert_eq!(quartic_argmin([0.0, 1.0, 0.0, 0.0]), 0.0);
    }
}
