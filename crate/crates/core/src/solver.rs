//! Line-search minimization over the admissible (free) degrees of freedom.
//!
//! Objectives expose a positive lumped metric `W` (quadrature weights per
//! degree of freedom). The stopping norm is `max |g_i| / W_i` over free
//! degrees of freedom, which is the sup-norm of the strong-form residual
//! rather than of the raw coefficient gradient, so tolerances do not scale
//! with the mesh width.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{sample_rng, uniform_vec};

pub const MAX_BACKTRACKS: usize = 60;

pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// Full (unprojected) gradient.
    fn gradient(&self, x: &[f64], g: &mut [f64]);
    /// Lumped metric, strictly positive.
    fn metric(&self) -> &[f64];
    /// `true` for degrees of freedom the solver may move.
    fn free(&self) -> &[bool];

    /// `J(x + t d) - J(x)`. Override with a cancellation-free expansion where
    /// available; the default differences two evaluations and so cannot
    /// resolve decreases below the rounding level of `J`.
    fn line_delta(&self, x: &[f64], d: &[f64], t: f64) -> f64 {
        let trial: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
        self.value(&trial) - self.value(x)
    }

    fn projected_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient(x, &mut g);
        for (gi, &f) in g.iter_mut().zip(self.free()) {
            if !f {
                *gi = 0.0;
            }
        }
        g
    }

    fn grad_norm(&self, g: &[f64]) -> f64 {
        g.iter()
            .zip(self.metric())
            .zip(self.free())
            .filter(|(_, &f)| f)
            .map(|((gi, wi), _)| (gi / wi).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GradientDescent,
    Lbfgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub ls_backtrack: f64,
    pub ls_c1: f64,
    pub method: Method,
    pub memory: usize,
    pub record_history: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            max_iters: 200_000,
            ls_backtrack: 0.5,
            ls_c1: 1e-4,
            method: Method::Lbfgs,
            memory: 20,
            record_history: false,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| Err(Error::Parameter { name, reason: reason.into() });
        if !(self.ls_backtrack > 0.0 && self.ls_backtrack < 1.0) {
            return bad("ls_backtrack", "must lie in (0, 1)");
        }
        if !(self.ls_c1 > 0.0 && self.ls_c1 < 0.5) {
            return bad("ls_c1", "must lie in (0, 0.5)");
        }
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return bad("grad_tol", "must be positive");
        }
        if self.method == Method::Lbfgs && self.memory == 0 {
            return bad("memory", "must be at least 1");
        }
        Ok(())
    }

    /// Default tolerance `1e-9 (1 + |J(u_init)|)`.
    pub fn default_tolerance(initial_value: f64) -> f64 {
        1e-9 * (1.0 + initial_value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub converged: bool,
    pub history: Vec<IterRecord>,
}

pub fn write_history_csv<W: Write>(history: &[IterRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "iter,J,grad_norm,step")?;
    for r in history {
        writeln!(out, "{},{:e},{:e},{:e}", r.iter, r.value, r.grad_norm, r.step)?;
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Lbfgs {
    s: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    rho: Vec<f64>,
    cap: usize,
}

impl Lbfgs {
    fn new(cap: usize) -> Self {
        Self { s: Vec::new(), y: Vec::new(), rho: Vec::new(), cap }
    }

    fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
        self.rho.clear();
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if sy <= 1e-300 || !sy.is_finite() {
            return;
        }
        if self.s.len() == self.cap {
            self.s.remove(0);
            self.y.remove(0);
            self.rho.remove(0);
        }
        self.rho.push(1.0 / sy);
        self.s.push(s);
        self.y.push(y);
    }

    /// Two-loop recursion with `H0 = gamma W^{-1}`.
    fn direction(&self, g: &[f64], winv: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let m = self.s.len();
        let mut alpha = vec![0.0; m];
        for k in (0..m).rev() {
            alpha[k] = self.rho[k] * dot(&self.s[k], &q);
            for (qi, yi) in q.iter_mut().zip(&self.y[k]) {
                *qi -= alpha[k] * yi;
            }
        }
        let gamma = match m {
            0 => 1.0,
            _ => {
                let y = &self.y[m - 1];
                let yhy: f64 = y.iter().zip(winv).map(|(a, w)| a * a * w).sum();
                1.0 / (self.rho[m - 1] * yhy)
            }
        };
        for (qi, w) in q.iter_mut().zip(winv) {
            *qi *= gamma * w;
        }
        for k in 0..m {
            let beta = self.rho[k] * dot(&self.y[k], &q);
            for (qi, si) in q.iter_mut().zip(&self.s[k]) {
                *qi += (alpha[k] - beta) * si;
            }
        }
        for v in q.iter_mut() {
            *v = -*v;
        }
        q
    }
}

/// Minimize `obj` from `x0`. Fixed degrees of freedom keep their initial values.
pub fn minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], opts: &SolveOptions) -> Result<CriticalPoint> {
    opts.validate()?;
    if x0.len() != obj.dim() {
        return Err(Error::Parameter { name: "x0", reason: format!("length {} != dim {}", x0.len(), obj.dim()) });
    }
    let winv: Vec<f64> = obj.metric().iter().map(|w| 1.0 / w).collect();
    let mut x = x0.to_vec();
    let mut f = obj.value(&x);
    let mut g = obj.projected_gradient(&x);
    let mut gn = obj.grad_norm(&g);
    let mut history = Vec::new();
    let mut memory = Lbfgs::new(opts.memory.max(1));
    if opts.record_history {
        history.push(IterRecord { iter: 0, value: f, grad_norm: gn, step: 0.0 });
    }
    let mut step: f64 = 1.0;
    let mut iter = 0;
    while gn > opts.grad_tol && iter < opts.max_iters {
        let steepest: Vec<f64> = g.iter().zip(&winv).map(|(gi, w)| -gi * w).collect();
        let mut d = match opts.method {
            Method::Lbfgs => memory.direction(&g, &winv),
            Method::GradientDescent => steepest.clone(),
        };
        let mut gd = dot(&g, &d);
        if !(gd < 0.0) {
            memory.clear();
            d = steepest.clone();
            gd = dot(&g, &d);
        }
        let mut t = match opts.method {
            Method::Lbfgs if !memory.s.is_empty() => 1.0,
            _ => (step * 2.0).min(1e12),
        };
        if opts.method == Method::Lbfgs && memory.s.is_empty() {
            // scale the first steepest step to a modest move
            let dn = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let xn = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            t = ((1.0 + xn) * 1e-2 / dn.max(1e-300)).min(1.0);
        }
        let mut accepted = None;
        let mut retried = false;
        loop {
            let mut tries = 0;
            while tries < MAX_BACKTRACKS {
                let delta = obj.line_delta(&x, &d, t);
                if delta.is_finite() && delta <= opts.ls_c1 * t * gd && delta < 0.0 {
                    let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
                    let ft = obj.value(&trial);
                    accepted = Some((trial, ft));
                    break;
                }
                t *= opts.ls_backtrack;
                tries += 1;
            }
            if accepted.is_some() || retried || opts.method == Method::GradientDescent {
                break;
            }
            memory.clear();
            d = steepest.clone();
            gd = dot(&g, &d);
            t = 1.0;
            retried = true;
        }
        let Some((xn, fnew)) = accepted else {
            return Err(Error::Stall { iter, value: f, grad_norm: gn, step: t });
        };
        let gnew = obj.projected_gradient(&xn);
        if opts.method == Method::Lbfgs {
            let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
            memory.push(s, y);
        }
        x = xn;
        f = fnew;
        g = gnew;
        gn = obj.grad_norm(&g);
        step = t;
        iter += 1;
        if opts.record_history {
            history.push(IterRecord { iter, value: f, grad_norm: gn, step: t });
        }
    }
    Ok(CriticalPoint { converged: gn <= opts.grad_tol, x, value: f, grad_norm: gn, iters: iter, history })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub samples: usize,
    pub directions: usize,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Central-difference check of directional derivatives at random states.
/// States and directions are uniform in `[-amp, amp]` on free degrees of freedom.
pub fn gradcheck<O: Objective + ?Sized>(
    obj: &O,
    base: &[f64],
    samples: usize,
    directions: usize,
    amp: f64,
    seed: u64,
) -> GradcheckReport {
    let n = obj.dim();
    let free = obj.free();
    let mut worst: f64 = 0.0;
    let mut g = vec![0.0; n];
    for s in 0..samples {
        let mut rng = sample_rng(seed, s as u64);
        let pert = uniform_vec(&mut rng, n, amp);
        let x: Vec<f64> = (0..n).map(|i| base[i] + if free[i] { pert[i] } else { 0.0 }).collect();
        obj.gradient(&x, &mut g);
        for _ in 0..directions {
            let mut d = uniform_vec(&mut rng, n, 1.0);
            for (di, &f) in d.iter_mut().zip(free) {
                if !f {
                    *di = 0.0;
                }
            }
            let xs = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let eps = 1e-4 * (1.0 + xs);
            let shift = |sgn: f64| -> Vec<f64> { x.iter().zip(&d).map(|(a, b)| a + sgn * eps * b).collect() };
            // fourth-order central stencil; exact for polynomial energies up to degree 4
            let fd = (8.0 * (obj.value(&shift(1.0)) - obj.value(&shift(-1.0)))
                - (obj.value(&shift(2.0)) - obj.value(&shift(-2.0))))
                / (12.0 * eps);
            let an = dot(&g, &d);
            let denom = fd.abs().max(an.abs()).max(1e-300);
            let rel = (fd - an).abs() / denom;
            worst = worst.max(if fd == an { 0.0 } else { rel });
        }
    }
    GradcheckReport { samples, directions, max_rel_error: worst, tolerance: 1e-5, passed: worst <= 1e-5 }
}
