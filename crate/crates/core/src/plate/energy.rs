use serde::{Deserialize, Serialize};

use super::ops::{Derivatives, PlateOps};
use super::{free_mask, LoadSet, PlateMode, PlateState};
use crate::constitutive::Tensor2D;
use crate::error::{Error, Result};
use crate::fields::BoundaryPart;
use crate::solver::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub membrane: f64,
    pub bending: f64,
    /// Load pairing `<u, f>`, entering the total with a minus sign.
    pub work: f64,
    pub spring: f64,
    pub total: f64,
}

/// Discrete plate energy with its exact gradient and line increments.
#[derive(Debug, Clone)]
pub struct PlateProblem {
    pub ops: PlateOps,
    pub membrane: Tensor2D,
    pub bending: Tensor2D,
    pub loads: LoadSet,
    pub mode: PlateMode,
    /// Traction-edge line weights (zero in clamped mode).
    pub boundary_w: Vec<f64>,
    metric: Vec<f64>,
    free: Vec<bool>,
}

impl PlateProblem {
    pub fn new(membrane: Tensor2D, bending: Tensor2D, loads: LoadSet, mode: PlateMode) -> Result<Self> {
        let grid = loads.p.grid;
        mode.check_grid(&grid)?;
        loads.validate(mode)?;
        let ops = PlateOps::new(grid);
        let boundary_w = match mode {
            PlateMode::Clamped => vec![0.0; grid.len()],
            PlateMode::Mixed => grid.boundary_weights(BoundaryPart::GammaT),
        };
        let metric = ops.weights.iter().chain(&ops.weights).chain(&ops.weights).copied().collect();
        Ok(Self { free: free_mask(&grid), metric, ops, membrane, bending, loads, mode, boundary_w })
    }

    pub fn n(&self) -> usize {
        self.ops.n()
    }

    /// Load pairing `<x, f>` including traction edges.
    pub fn work(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let l = &self.loads;
        let w = &self.ops.weights;
        let b = &self.boundary_w;
        (0..n)
            .map(|k| {
                w[k] * (l.p1.values[k] * x[k] + l.p2.values[k] * x[n + k] + l.p.values[k] * x[2 * n + k])
                    + b[k]
                        * (l.pt1.values[k] * x[k] + l.pt2.values[k] * x[n + k] + l.pt.values[k] * x[2 * n + k])
            })
            .sum()
    }

    pub fn spring(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let l = &self.loads;
        (0..n)
            .filter(|&k| self.boundary_w[k] != 0.0)
            .map(|k| self.boundary_w[k] * (l.eps1.values[k] * x[k] * x[k] + l.eps2.values[k] * x[n + k] * x[n + k]))
            .sum()
    }

    pub fn breakdown(&self, x: &[f64]) -> EnergyBreakdown {
        let d = self.ops.derivatives(x);
        self.breakdown_with(x, &d)
    }

    pub fn breakdown_with(&self, x: &[f64], d: &Derivatives) -> EnergyBreakdown {
        let n = self.n();
        let membrane = 0.5 * self.ops.integrate((0..n).map(|k| self.membrane.quad(d.gamma(k))));
        let bending = 0.5 * self.ops.integrate((0..n).map(|k| self.bending.quad(d.kappa(k))));
        let work = self.work(x);
        let spring = self.spring(x);
        EnergyBreakdown { membrane, bending, work, spring, total: membrane + bending - work + spring }
    }

    /// Unprojected gradient.
    pub fn full_gradient(&self, x: &[f64], g: &mut [f64]) {
        let n = self.n();
        let d = self.ops.derivatives(x);
        let wts = &self.ops.weights;
        let mut a11 = vec![0.0; n];
        let mut a22 = vec![0.0; n];
        let mut a12 = vec![0.0; n];
        let mut q1 = vec![0.0; n];
        let mut q2 = vec![0.0; n];
        let mut m11 = vec![0.0; n];
        let mut m22 = vec![0.0; n];
        let mut m12 = vec![0.0; n];
        for k in 0..n {
            let s = self.membrane.apply(d.gamma(k));
            let m = self.bending.apply(d.kappa(k));
            let wk = wts[k];
            a11[k] = wk * s[0];
            a22[k] = wk * s[1];
            a12[k] = wk * s[2];
            q1[k] = wk * (s[0] * d.wx[k] + s[2] * d.wy[k]);
            q2[k] = wk * (s[2] * d.wx[k] + s[1] * d.wy[k]);
            m11[k] = wk * m[0];
            m22[k] = wk * m[1];
            m12[k] = 2.0 * wk * m[2];
        }
        let (t11, t12y) = (self.ops.gxt(&a11), self.ops.gyt(&a12));
        let (t22, t12x) = (self.ops.gyt(&a22), self.ops.gxt(&a12));
        let (tq1, tq2) = (self.ops.gxt(&q1), self.ops.gyt(&q2));
        let tm = self.ops.hessian_t(&m11, &m22, &m12);
        let l = &self.loads;
        let b = &self.boundary_w;
        for k in 0..n {
            g[k] = t11[k] + t12y[k] - wts[k] * l.p1.values[k] - b[k] * l.pt1.values[k]
                + 2.0 * b[k] * l.eps1.values[k] * x[k];
            g[n + k] = t22[k] + t12x[k] - wts[k] * l.p2.values[k] - b[k] * l.pt2.values[k]
                + 2.0 * b[k] * l.eps2.values[k] * x[n + k];
            g[2 * n + k] = tq1[k] + tq2[k] - tm[k] - wts[k] * l.p.values[k] - b[k] * l.pt.values[k];
        }
    }

    /// Coefficients `[c1, c2, c3, c4]` of `J(x + t d) - J(x) = sum c_i t^i`.
    pub fn line_polynomial(&self, x: &[f64], dir: &[f64]) -> [f64; 4] {
        let n = self.n();
        let d0 = self.ops.derivatives(x);
        let d1 = self.ops.derivatives(dir);
        let mut c = [0.0; 4];
        for k in 0..n {
            let g0 = d0.gamma(k);
            let s1 = d1.sym_grad(k);
            let (ax, ay, bx, by) = (d0.wx[k], d0.wy[k], d1.wx[k], d1.wy[k]);
            let g1 = [s1[0] + ax * bx, s1[1] + ay * by, s1[2] + 0.5 * (ax * by + ay * bx)];
            let g2 = [0.5 * bx * bx, 0.5 * by * by, 0.5 * bx * by];
            let n0 = self.membrane.apply(g0);
            let n1 = self.membrane.apply(g1);
            let n2 = self.membrane.apply(g2);
            let dd = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + 2.0 * a[2] * b[2];
            let k0 = d0.kappa(k);
            let k1 = d1.kappa(k);
            let m0 = self.bending.apply(k0);
            let m1 = self.bending.apply(k1);
            let wk = self.ops.weights[k];
            c[0] += wk * (dd(n0, g1) + dd(m0, k1));
            c[1] += wk * (0.5 * dd(n1, g1) + dd(n0, g2) + 0.5 * dd(m1, k1));
            c[2] += wk * dd(n1, g2);
            c[3] += wk * 0.5 * dd(n2, g2);
        }
        let l = &self.loads;
        c[0] -= self.work(dir);
        for k in (0..n).filter(|&k| self.boundary_w[k] != 0.0) {
            let b = self.boundary_w[k];
            c[0] += 2.0 * b * (l.eps1.values[k] * x[k] * dir[k] + l.eps2.values[k] * x[n + k] * dir[n + k]);
            c[1] += b * (l.eps1.values[k] * dir[k] * dir[k] + l.eps2.values[k] * dir[n + k] * dir[n + k]);
        }
        c
    }

    pub fn state(&self, x: &[f64]) -> Result<PlateState> {
        PlateState::from_vec(self.ops.grid, x)
    }

    fn check_state(&self, u: &PlateState) -> Result<()> {
        if u.grid() != self.ops.grid {
            return Err(Error::Grid("state and loads live on different grids".into()));
        }
        Ok(())
    }
}

impl Objective for PlateProblem {
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

/// Energy of `u` under the given tensors, loads and boundary mode.
pub fn energy(
    u: &PlateState,
    membrane: &Tensor2D,
    bending: &Tensor2D,
    loads: &LoadSet,
    mode: PlateMode,
) -> Result<EnergyBreakdown> {
    let p = PlateProblem::new(*membrane, *bending, loads.clone(), mode)?;
    p.check_state(u)?;
    Ok(p.breakdown(&u.to_vec()))
}

/// Exact gradient of [`energy`], clamped rows set to zero.
pub fn gradient(
    u: &PlateState,
    membrane: &Tensor2D,
    bending: &Tensor2D,
    loads: &LoadSet,
    mode: PlateMode,
) -> Result<PlateState> {
    let p = PlateProblem::new(*membrane, *bending, loads.clone(), mode)?;
    p.check_state(u)?;
    p.state(&p.projected_gradient(&u.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{build_bending_tensor, build_membrane_tensor, LameParams};
    use crate::fields::{BoundaryPartition, Grid2, ScalarField2};
    use crate::rng::{sample_rng, uniform_vec};
    use crate::solver::gradcheck;

    fn tensors() -> (Tensor2D, Tensor2D) {
        let p = LameParams::new(1.0, 1.0, 1.0).unwrap();
        let h = build_membrane_tensor(&p).unwrap();
        (h, build_bending_tensor(&h, &p))
    }

    fn mixed_loads(g: Grid2) -> LoadSet {
        let mut l = LoadSet::zeros(g);
        l.p = ScalarField2::from_fn(g, |x, y| 1.0 + x * y);
        l.p1 = ScalarField2::from_fn(g, |x, _| 0.3 * x);
        l.p2 = ScalarField2::from_fn(g, |_, y| -0.2 + y);
        l.pt = ScalarField2::constant(g, 0.1);
        l.pt1 = ScalarField2::constant(g, -0.4);
        l.pt2 = ScalarField2::constant(g, 0.25);
        l.eps1 = ScalarField2::constant(g, 0.5);
        l.eps2 = ScalarField2::constant(g, 0.7);
        l
    }

    fn random_state(g: Grid2, seed: u64, amp: f64) -> PlateState {
        let mut rng = sample_rng(seed, 0);
        let mut s = PlateState::from_vec(g, &uniform_vec(&mut rng, 3 * g.len(), amp)).unwrap();
        s.enforce_clamp();
        s
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let g = Grid2::unit_square(9).unwrap();
        let (h, hb) = tensors();
        let e = energy(&PlateState::zeros(g), &h, &hb, &LoadSet::transverse(g, 1.0), PlateMode::Clamped).unwrap();
        assert_eq!(e, EnergyBreakdown { membrane: 0.0, bending: 0.0, work: 0.0, spring: 0.0, total: 0.0 });
        let gr = gradient(&PlateState::zeros(g), &h, &hb, &LoadSet::zeros(g), PlateMode::Clamped).unwrap();
        assert_eq!(gr.to_vec().iter().fold(0.0_f64, |m, v| m.max(v.abs())), 0.0);
    }

    #[test]
    fn unloaded_energy_is_stored_energy() {
        let g = Grid2::unit_square(9).unwrap();
        let (h, hb) = tensors();
        for seed in 0..10 {
            let s = random_state(g, seed, 0.5);
            let e = energy(&s, &h, &hb, &LoadSet::zeros(g), PlateMode::Clamped).unwrap();
            assert!(e.membrane >= 0.0 && e.bending >= 0.0);
            assert_eq!(e.total, e.membrane + e.bending);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (h, hb) = tensors();
        let g = Grid2::unit_square(11).unwrap();
        let p = PlateProblem::new(h, hb, LoadSet::transverse(g, 1.0), PlateMode::Clamped).unwrap();
        let r = gradcheck(&p, &vec![0.0; 3 * g.len()], 20, 5, 0.1, 5);
        assert!(r.max_rel_error <= 1e-6, "{r:?}");

        let gm = Grid2::new(11, 9, 1.0, 0.8, BoundaryPartition::west_south_clamped()).unwrap();
        let p = PlateProblem::new(h, hb, mixed_loads(gm), PlateMode::Mixed).unwrap();
        let r = gradcheck(&p, &vec![0.0; 3 * gm.len()], 20, 5, 0.1, 6);
        assert!(r.max_rel_error <= 1e-6, "{r:?}");
    }

    #[test]
    fn line_polynomial_matches_direct_difference() {
        let (h, hb) = tensors();
        let gm = Grid2::new(9, 9, 1.0, 1.0, BoundaryPartition::west_south_clamped()).unwrap();
        let p = PlateProblem::new(h, hb, mixed_loads(gm), PlateMode::Mixed).unwrap();
        let x = random_state(gm, 1, 0.3).to_vec();
        let d = random_state(gm, 2, 0.3).to_vec();
        for t in [1e-3, 0.1, 1.0, 2.5] {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let direct = p.value(&xt) - p.value(&x);
            let poly = p.line_delta(&x, &d, t);
            assert!((direct - poly).abs() <= 1e-12 * (1.0 + direct.abs()), "t={t}: {direct} vs {poly}");
        }
    }

    #[test]
    fn spring_and_tractions_only_in_mixed_mode() {
        let (h, hb) = tensors();
        let gm = Grid2::new(9, 9, 1.0, 1.0, BoundaryPartition::west_south_clamped()).unwrap();
        let s = random_state(gm, 3, 0.2);
        let e = energy(&s, &h, &hb, &mixed_loads(gm), PlateMode::Mixed).unwrap();
        assert!(e.spring > 0.0);
        let mut l = mixed_loads(gm);
        l.eps1 = ScalarField2::zeros(gm);
        assert!(energy(&s, &h, &hb, &l, PlateMode::Mixed).is_err());
    }
}
