use serde::{Deserialize, Serialize};

use super::{
    bstar_margin, extract_dual, f_star, g1_star, g2_star, j1_star, j2_star, j_star, l_operator, residual_fields,
    DualContext, DualPoint,
};
use crate::constitutive::{nk_inverse_field, nk_margin};
use crate::error::Result;
use crate::fields::{diff2, Axis, ScalarField2, SymTensorField2};
use crate::plate::PlateProblem;
use crate::rng::{low_mode_field, sample_rng, uniform_vec};
use crate::solver::Objective;

const MAX_K_TRIES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "value")]
pub enum KPolicy {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub grad_tol: f64,
    pub eps3: f64,
    pub k: KPolicy,
    pub seed: u64,
    pub weak_trials: usize,
    pub concavity_directions: usize,
    pub j2_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            eps3: 0.5,
            k: KPolicy::Auto,
            seed: 0,
            weak_trials: 200,
            concavity_directions: 100,
            j2_samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KAttempt {
    pub k: f64,
    pub bstar_margin: f64,
    pub j2_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    pub k: f64,
    pub ok: bool,
    pub attempts: Vec<KAttempt>,
    pub failure: Option<String>,
}

/// Minimum of `J2*` over unit-norm random low-mode `z*` vanishing on the
/// clamped deflection set.
pub fn sample_j2_min(ctx: &DualContext, k: f64, samples: usize, seed: u64) -> Result<f64> {
    let g = ctx.ops.grid;
    let mut min = f64::INFINITY;
    for s in 0..samples {
        let mut rng = sample_rng(seed ^ 0x4A32, s as u64);
        let mut z = low_mode_field(&mut rng, &g, 4);
        for (v, &f) in z.iter_mut().zip(&ctx.free_w) {
            if !f {
                *v = 0.0;
            }
        }
        let norm = ctx.ops.integrate(z.iter().map(|v| v * v)).sqrt();
        if norm == 0.0 {
            continue;
        }
        z.iter_mut().for_each(|v| *v /= norm);
        min = min.min(j2_star(ctx, &z, k)?);
    }
    Ok(min)
}

/// Choose `K`: start from `1 + ||N||`, double on a B* failure, halve when
/// sampled `J2*` is not positive.
pub fn select_k(ctx: &DualContext, x: &[f64], policy: KPolicy, samples: usize, seed: u64) -> Result<KSelection> {
    let n = ctx.n();
    let d = ctx.ops.derivatives(x);
    let mut nf = SymTensorField2::zeros(ctx.ops.grid);
    for i in 0..n {
        nf.set_node(i, ctx.membrane.apply(d.gamma(i)));
    }
    let (mut k, tries) = match policy {
        KPolicy::Fixed(k) => (k, 1),
        KPolicy::Auto => (1.0 + nf.max_abs(), MAX_K_TRIES),
    };
    let mut attempts = Vec::new();
    let mut grew = false;
    let mut shrank = false;
    for _ in 0..tries {
        let margin = nk_margin(&nf, k);
        if margin <= 0.0 {
            attempts.push(KAttempt { k, bstar_margin: margin, j2_min: None });
            grew = true;
            k *= 2.0;
        } else {
            let j2 = sample_j2_min(ctx, k, samples, seed)?;
            attempts.push(KAttempt { k, bstar_margin: margin, j2_min: Some(j2) });
            if j2 > 0.0 {
                return Ok(KSelection { k, ok: true, attempts, failure: None });
            }
            shrank = true;
            k *= 0.5;
        }
        if grew && shrank {
            let msg = "no K satisfies both the B* condition and J2* > 0".to_string();
            return Ok(KSelection { k: attempts.last().map_or(k, |a| a.k), ok: false, attempts, failure: Some(msg) });
        }
    }
    let last = attempts.last().map_or(k, |a| a.k);
    let msg = format!("K selection exhausted after {} attempts", attempts.len());
    Ok(KSelection { k: last, ok: false, attempts, failure: Some(msg) })
}

/// Interior sup-norms `(membrane, moment)` of the equilibrium residuals.
pub fn equilibrium_residuals(ctx: &DualContext, dp: &DualPoint) -> (f64, f64) {
    let ([r1, r2], rm) = residual_fields(ctx, dp);
    let mem = (0..ctx.n()).filter(|&k| ctx.free_u[k]).map(|k| r1[k].abs().max(r2[k].abs())).fold(0.0, f64::max);
    let mom = (0..ctx.n()).filter(|&k| ctx.free_w[k]).map(|k| rm[k].abs()).fold(0.0, f64::max);
    (mem, mom)
}

/// Residuals of the first-order conditions of `J3*` at `(v*, z*, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    pub m_tilde: f64,
    pub q: f64,
    pub n: f64,
    pub z_star: f64,
    pub u_membrane: f64,
    pub u_moment: f64,
    /// `max |z* + K w|`.
    pub z_relation: f64,
    /// Three-point Laplacian form of the `z*` equation, relative; `O(h^2)`.
    pub z_laplacian_gap: f64,
}

impl Stationarity {
    pub fn max(&self) -> f64 {
        [self.m_tilde, self.q, self.n, self.z_star, self.u_membrane, self.u_moment].into_iter().fold(0.0, f64::max)
    }
}

pub fn stationarity(ctx: &DualContext, dp: &DualPoint, x: &[f64]) -> Result<Stationarity> {
    let n = ctx.n();
    let d = ctx.ops.derivatives(x);
    let z = &dp.z_star.values;
    let k = dp.k;
    let e = ctx.bending_strain(&dp.m_tilde, z);
    let inv = nk_inverse_field(&dp.n, k)?;
    let mut rm: f64 = 0.0;
    let mut rq: f64 = 0.0;
    let mut rn: f64 = 0.0;
    for i in 0..n {
        rm = rm.max((e.t11[i] - d.wxx[i]).abs()).max((e.t22[i] - d.wyy[i]).abs()).max((e.t12[i] - d.wxy[i]).abs());
        let a = inv.t11[i] * dp.q.x[i] + inv.t12[i] * dp.q.y[i];
        let b = inv.t12[i] * dp.q.x[i] + inv.t22[i] * dp.q.y[i];
        rq = rq.max((a - d.wx[i]).abs()).max((b - d.wy[i]).abs());
        let hn = ctx.membrane_inv.apply(dp.n.node(i));
        let s = d.sym_grad(i);
        rn = rn
            .max((0.5 * a * a + s[0] - hn[0]).abs())
            .max((0.5 * b * b + s[1] - hn[1]).abs())
            .max((0.5 * a * b + s[2] - hn[2]).abs());
    }
    // z* equation: (1/K) W^{-1} G^T W G z* - tr(hbar (M~ + z* delta)) = 0
    let w = &ctx.ops.weights;
    let (zx, zy) = (ctx.ops.gx(z), ctx.ops.gy(z));
    let wzx: Vec<f64> = zx.iter().zip(w).map(|(a, b)| a * b).collect();
    let wzy: Vec<f64> = zy.iter().zip(w).map(|(a, b)| a * b).collect();
    let (tx, ty) = (ctx.ops.gxt(&wzx), ctx.ops.gyt(&wzy));
    let rz = (0..n)
        .filter(|&i| ctx.free_w[i])
        .map(|i| ((tx[i] + ty[i]) / (k * w[i]) - (e.t11[i] + e.t22[i])).abs())
        .fold(0.0, f64::max);
    let (u_membrane, u_moment) = equilibrium_residuals(ctx, dp);
    let z_relation = (0..n).map(|i| (z[i] + k * x[2 * n + i]).abs()).fold(0.0, f64::max);

    let zf = ScalarField2::from_values(ctx.ops.grid, z.clone());
    let lap = |f: &ScalarField2| -> Result<Vec<f64>> {
        let a = diff2(f, Axis::X, Axis::X)?;
        let b = diff2(f, Axis::Y, Axis::Y)?;
        Ok(a.values.iter().zip(&b.values).map(|(p, q)| p + q).collect())
    };
    let lz = lap(&zf)?;
    let mut gap: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in (0..n).filter(|&i| ctx.free_w[i]) {
        let tr = e.t11[i] + e.t22[i];
        gap = gap.max((-lz[i] / k - tr).abs());
        scale = scale.max(tr.abs());
    }
    let z_laplacian_gap = if scale > 0.0 { gap / scale } else { gap };
    Ok(Stationarity { m_tilde: rm, q: rq, n: rn, z_star: rz, u_membrane, u_moment, z_relation, z_laplacian_gap })
}

pub fn duality_gap(j_primal: f64, j_dual: f64) -> f64 {
    (j_primal - j_dual).abs() / (1.0 + j_primal.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakDualityReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `J* - (J(u) + K/2 |grad(w - w0)|^2)` seen.
    pub max_excess: f64,
    pub tol: f64,
}

/// Check `J*(v0*, z0*) <= J(u) + K/2 int |grad w - grad w0|^2` on random
/// admissible states around `x0`. The first trial is `x0` itself.
pub fn weak_duality_probe(
    problem: &PlateProblem,
    ctx: &DualContext,
    j_dual: f64,
    x0: &[f64],
    k: f64,
    trials: usize,
    tol: f64,
    seed: u64,
) -> WeakDualityReport {
    let n = ctx.n();
    let g = ctx.ops.grid;
    let free = problem.free();
    let scale = x0.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-6);
    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for t in 0..trials {
        let mut x = x0.to_vec();
        if t > 0 {
            let mut rng = sample_rng(seed ^ 0x77EA, t as u64);
            let amp = scale * 10f64.powf(-3.0 + 4.0 * (t as f64 / trials as f64));
            let noise = uniform_vec(&mut rng, 3 * n, 0.05 * amp);
            for c in 0..3 {
                let smooth = low_mode_field(&mut rng, &g, 6);
                for i in 0..n {
                    x[c * n + i] += amp * smooth[i] + noise[c * n + i];
                }
            }
            for (v, &f) in x.iter_mut().zip(free) {
                if !f {
                    *v = 0.0;
                }
            }
        }
        let dw: Vec<f64> = (0..n).map(|i| x[2 * n + i] - x0[2 * n + i]).collect();
        let (a, b) = (ctx.ops.gx(&dw), ctx.ops.gy(&dw));
        let rhs = problem.value(&x) + 0.5 * k * ctx.ops.integrate((0..n).map(|i| a[i] * a[i] + b[i] * b[i]));
        let excess = j_dual - rhs;
        max_excess = max_excess.max(excess);
        if excess > tol {
            violations += 1;
        }
    }
    WeakDualityReport { trials, violations, max_excess, tol }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub directions: usize,
    pub skipped: usize,
    /// Largest normalized second difference (positive means convex direction).
    pub max_second_difference: f64,
    pub tol: f64,
    pub violations: usize,
}

/// Second differences of `J1*` along random `(N, Q, M~)` directions at fixed `z*`.
pub fn concavity_probe(ctx: &DualContext, base: &DualPoint, directions: usize, seed: u64) -> Result<ConcavityReport> {
    let n = ctx.n();
    let margin = bstar_margin(base);
    let j0 = j1_star(ctx, base)?;
    let q_amp = base.q.x.iter().chain(&base.q.y).fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-6);
    let m_amp = base.m_tilde.max_abs().max(1e-6);
    let n_amp = 0.1 * margin;
    let tol = 1e-8;
    let mut skipped = 0;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for s in 0..directions {
        let mut rng = sample_rng(seed ^ 0xC0C0, s as u64);
        let dn = uniform_vec(&mut rng, 3 * n, n_amp);
        let dq = uniform_vec(&mut rng, 2 * n, q_amp);
        let dm = uniform_vec(&mut rng, 3 * n, m_amp);
        let shifted = |sign: f64| -> DualPoint {
            let mut p = base.clone();
            for i in 0..n {
                p.n.t11[i] += sign * dn[i];
                p.n.t22[i] += sign * dn[n + i];
                p.n.t12[i] += sign * dn[2 * n + i];
                p.q.x[i] += sign * dq[i];
                p.q.y[i] += sign * dq[n + i];
                p.m_tilde.t11[i] += sign * dm[i];
                p.m_tilde.t22[i] += sign * dm[n + i];
                p.m_tilde.t12[i] += sign * dm[2 * n + i];
            }
            p
        };
        let (plus, minus) = (shifted(1.0), shifted(-1.0));
        if bstar_margin(&plus) <= 0.0 || bstar_margin(&minus) <= 0.0 {
            skipped += 1;
            continue;
        }
        let (jp, jm) = (j1_star(ctx, &plus)?, j1_star(ctx, &minus)?);
        let scale = 1.0 + jp.abs().max(jm.abs()).max(j0.abs());
        let sd = (jp - 2.0 * j0 + jm) / scale;
        worst = worst.max(sd);
        if sd > tol {
            violations += 1;
        }
    }
    Ok(ConcavityReport { directions, skipped, max_second_difference: worst, tol, violations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl CheckOutcome {
    /// Passes when `value <= tol`.
    pub fn le(name: &str, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, passed: value <= tol }
    }

    /// Passes when `value >= tol`.
    pub fn ge(name: &str, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, passed: value >= tol }
    }

    /// Passes when `value > tol`.
    pub fn gt(name: &str, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, passed: value > tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub k: f64,
    pub k_selection: KSelection,
    pub bstar_margin: f64,
    pub j_primal: f64,
    pub j_star: f64,
    pub j1_star: f64,
    pub gap: f64,
    pub l_norm: f64,
    pub l_identity: f64,
    pub residual_membrane: f64,
    pub residual_moment: f64,
    pub tol_eq: f64,
    pub stationarity: Stationarity,
    /// Fenchel equalities for `G1*`, `G2*`, `F*` at the extracted point.
    pub fenchel: [f64; 3],
    pub weak_duality: WeakDualityReport,
    pub j2_min_sampled: f64,
    pub concavity: ConcavityReport,
    pub checks: Vec<CheckOutcome>,
}

impl DualReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn fenchel_residuals(ctx: &DualContext, problem: &PlateProblem, dp: &DualPoint, x: &[f64]) -> Result<[f64; 3]> {
    let n = ctx.n();
    let d = ctx.ops.derivatives(x);
    let z = &dp.z_star.values;
    let e = problem.breakdown_with(x, &d);
    let g1 = g1_star(ctx, &dp.m_tilde, z);
    let pair1 = ctx.ops.integrate((0..n).map(|i| {
        let s = dp.m_tilde.node(i);
        d.wxx[i] * (s[0] + z[i]) + d.wyy[i] * (s[1] + z[i]) + 2.0 * d.wxy[i] * s[2]
    }));
    let r1 = (g1 - (pair1 - e.bending)).abs() / (1.0 + g1.abs());
    let g2 = g2_star(ctx, &dp.n, &dp.q, dp.k)?;
    let k = dp.k;
    let mut pair2 = 0.0;
    let mut g2_primal = 0.0;
    for i in 0..n {
        let s = d.sym_grad(i);
        let nn = dp.n.node(i);
        let w = ctx.ops.weights[i];
        pair2 += w * (s[0] * nn[0] + s[1] * nn[1] + 2.0 * s[2] * nn[2] + d.wx[i] * dp.q.x[i] + d.wy[i] * dp.q.y[i]);
        g2_primal += w * (0.5 * ctx.membrane.quad(d.gamma(i)) + 0.5 * k * (d.wx[i].powi(2) + d.wy[i].powi(2)));
    }
    let r2 = (g2 - (pair2 - g2_primal)).abs() / (1.0 + g2.abs());
    let fs = f_star(ctx, z, k)?;
    let (zx, zy) = (ctx.ops.gx(z), ctx.ops.gy(z));
    let grad_pair = ctx.ops.integrate((0..n).map(|i| d.wx[i] * zx[i] + d.wy[i] * zy[i]));
    let f_u = 0.5 * k * ctx.ops.integrate((0..n).map(|i| d.wx[i].powi(2) + d.wy[i].powi(2)));
    let r3 = (fs - (-grad_pair - f_u)).abs() / (1.0 + fs.abs());
    Ok([r1, r2, r3])
}

/// Run every dual check at the critical point `x0` of `problem`.
pub fn verify(problem: &PlateProblem, x0: &[f64], opts: &VerifyOptions) -> Result<DualReport> {
    let ctx = DualContext::new(problem, opts.eps3)?;
    let sel = select_k(&ctx, x0, opts.k, opts.j2_samples, opts.seed)?;
    let k = sel.k;
    let dp = extract_dual(&ctx, x0, k)?;
    let j_primal = problem.value(x0);
    let js = j_star(&ctx, &dp)?;
    let j1 = j1_star(&ctx, &dp)?;
    let l = l_operator(&ctx, &dp.m_tilde, &dp.z_star.values);
    let l_norm = l.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let (rmem, rmom) = equilibrium_residuals(&ctx, &dp);
    let tol_eq = 10.0 * opts.grad_tol * (1.0 + problem.loads.max_abs());
    let st = stationarity(&ctx, &dp, x0)?;
    let fenchel = fenchel_residuals(&ctx, problem, &dp, x0)?;
    let tol_weak = 1e-8 * (1.0 + j_primal.abs());
    let weak = weak_duality_probe(problem, &ctx, js, x0, k, opts.weak_trials, tol_weak, opts.seed);
    let j2_min = sample_j2_min(&ctx, k, opts.j2_samples, opts.seed)?;
    let conc = concavity_probe(&ctx, &dp, opts.concavity_directions, opts.seed)?;
    let gap = duality_gap(j_primal, js);
    let margin = bstar_margin(&dp);
    let st_tol = 10.0 * opts.grad_tol;
    let checks = vec![
        CheckOutcome::le("duality_gap", gap, 1e-6),
        CheckOutcome::le("l_identity", (j1 - js).abs(), 1e-10),
        CheckOutcome::le("residual_membrane", rmem, tol_eq),
        CheckOutcome::le("residual_moment", rmom, tol_eq),
        CheckOutcome::gt("bstar_margin", margin, 0.0),
        CheckOutcome::le("stationarity", st.max(), st_tol),
        CheckOutcome::le("z_relation", st.z_relation, 0.0),
        CheckOutcome::le("fenchel", fenchel.into_iter().fold(0.0, f64::max), 1e-8),
        CheckOutcome::le("weak_duality_violations", weak.violations as f64, 0.0),
        CheckOutcome { name: "j2_positive".into(), value: j2_min, tol: 0.0, passed: sel.ok && j2_min > 0.0 },
        CheckOutcome::le("concavity_violations", conc.violations as f64, 0.0),
    ];
    Ok(DualReport {
        k,
        k_selection: sel,
        bstar_margin: margin,
        j_primal,
        j_star: js,
        j1_star: j1,
        gap,
        l_norm,
        l_identity: (j1 - js).abs(),
        residual_membrane: rmem,
        residual_moment: rmom,
        tol_eq,
        stationarity: st,
        fenchel,
        weak_duality: weak,
        j2_min_sampled: j2_min,
        concavity: conc,
        checks,
    })
}
