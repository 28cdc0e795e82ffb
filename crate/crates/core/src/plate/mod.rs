//! Nonlinear Kirchhoff-Love plate: state, loads, strain measures, energy and
//! the coercivity certificate.

pub(crate) mod certificate;
mod energy;
mod ops;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{BoundaryPart, Grid2, ScalarField2, SymTensorField2};

pub use certificate::{
    build_t_field, coercivity_floor, coercivity_lower_bound, BoundDetail, CoercivityCertificate,
};
pub use energy::{energy, gradient, EnergyBreakdown, PlateProblem};
pub use ops::PlateOps;

/// Boundary treatment of the plate energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateMode {
    /// Whole boundary clamped; work is the domain load pairing only.
    Clamped,
    /// Clamped on part of the boundary, tractions and springs on the rest.
    Mixed,
}

impl PlateMode {
    pub fn check_grid(self, grid: &Grid2) -> Result<()> {
        match self {
            PlateMode::Clamped if !grid.partition.is_fully_clamped() => {
                Err(Error::Config("clamped mode requires every edge to be clamped".into()))
            }
            PlateMode::Mixed if !grid.has_part(BoundaryPart::GammaT) => {
                Err(Error::Config("mixed mode requires at least one traction edge".into()))
            }
            _ => Ok(()),
        }
    }
}

/// In-plane displacements and deflection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateState {
    pub u1: ScalarField2,
    pub u2: ScalarField2,
    pub w: ScalarField2,
}

impl PlateState {
    pub fn zeros(grid: Grid2) -> Self {
        Self { u1: ScalarField2::zeros(grid), u2: ScalarField2::zeros(grid), w: ScalarField2::zeros(grid) }
    }

    pub fn grid(&self) -> Grid2 {
        self.w.grid
    }

    /// Flat layout `[u1 | u2 | w]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.w.values.len());
        v.extend_from_slice(&self.u1.values);
        v.extend_from_slice(&self.u2.values);
        v.extend_from_slice(&self.w.values);
        v
    }

    pub fn from_vec(grid: Grid2, v: &[f64]) -> Result<Self> {
        let n = grid.len();
        if v.len() != 3 * n {
            return Err(Error::Grid(format!("state vector has length {}, expected {}", v.len(), 3 * n)));
        }
        Ok(Self {
            u1: ScalarField2::from_values(grid, v[..n].to_vec()),
            u2: ScalarField2::from_values(grid, v[n..2 * n].to_vec()),
            w: ScalarField2::from_values(grid, v[2 * n..].to_vec()),
        })
    }

    /// Zero the clamped degrees of freedom.
    pub fn enforce_clamp(&mut self) {
        let g = self.grid();
        for (k, fixed) in g.clamp_mask_inplane().into_iter().enumerate() {
            if fixed {
                self.u1.values[k] = 0.0;
                self.u2.values[k] = 0.0;
            }
        }
        for (k, fixed) in g.clamp_mask_deflection().into_iter().enumerate() {
            if fixed {
                self.w.values[k] = 0.0;
            }
        }
    }

    /// Max violation of the clamped conditions.
    pub fn clamp_violation(&self) -> f64 {
        let g = self.grid();
        let a = self.u1.max_abs_where(&g.clamp_mask_inplane()).max(self.u2.max_abs_where(&g.clamp_mask_inplane()));
        a.max(self.w.max_abs_where(&g.clamp_mask_deflection()))
    }
}

/// Free-degree mask for the flat `[u1 | u2 | w]` layout.
pub fn free_mask(grid: &Grid2) -> Vec<bool> {
    let inplane = grid.clamp_mask_inplane();
    let defl = grid.clamp_mask_deflection();
    inplane.iter().chain(&inplane).chain(&defl).map(|f| !f).collect()
}

/// Domain loads, boundary tractions and spring coefficients. Boundary
/// quantities are nodal fields read only on traction-edge nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSet {
    pub p: ScalarField2,
    pub p1: ScalarField2,
    pub p2: ScalarField2,
    pub pt: ScalarField2,
    pub pt1: ScalarField2,
    pub pt2: ScalarField2,
    pub eps1: ScalarField2,
    pub eps2: ScalarField2,
}

impl LoadSet {
    pub fn zeros(grid: Grid2) -> Self {
        let z = ScalarField2::zeros(grid);
        Self {
            p: z.clone(),
            p1: z.clone(),
            p2: z.clone(),
            pt: z.clone(),
            pt1: z.clone(),
            pt2: z.clone(),
            eps1: z.clone(),
            eps2: z,
        }
    }

    /// Uniform transverse load only.
    pub fn transverse(grid: Grid2, p: f64) -> Self {
        Self { p: ScalarField2::constant(grid, p), ..Self::zeros(grid) }
    }

    pub fn validate(&self, mode: PlateMode) -> Result<()> {
        let g = self.p.grid;
        for (name, f) in [("eps1", &self.eps1), ("eps2", &self.eps2)] {
            if f.values.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Parameter { name, reason: "spring coefficients must be nonnegative".into() });
            }
            if mode == PlateMode::Mixed {
                let bw = g.boundary_weights(BoundaryPart::GammaT);
                let gamma0 = g.clamp_mask_inplane();
                let bad = (0..g.len()).any(|k| bw[k] > 0.0 && !gamma0[k] && f.values[k] <= 0.0);
                if bad {
                    return Err(Error::Parameter {
                        name,
                        reason: "spring coefficients must be positive on traction edges".into(),
                    });
                }
            }
        }
        let all = [&self.p, &self.p1, &self.p2, &self.pt, &self.pt1, &self.pt2];
        if all.iter().any(|f| f.values.iter().any(|v| !v.is_finite())) {
            return Err(Error::Config("non-finite load value".into()));
        }
        Ok(())
    }

    /// Sup-norm over all load fields.
    pub fn max_abs(&self) -> f64 {
        [&self.p, &self.p1, &self.p2, &self.pt, &self.pt1, &self.pt2]
            .iter()
            .map(|f| f.max_abs())
            .fold(0.0, f64::max)
    }
}

/// Membrane strain `sym grad u + 1/2 grad w (x) grad w`.
pub fn gamma(u: &PlateState) -> SymTensorField2 {
    let ops = PlateOps::new(u.grid());
    let d = ops.derivatives(&u.to_vec());
    let mut g = SymTensorField2::zeros(u.grid());
    for k in 0..g.t11.len() {
        g.set_node(k, d.gamma(k));
    }
    g
}

/// Curvature `-w_{,ab}`.
pub fn kappa(u: &PlateState) -> SymTensorField2 {
    let ops = PlateOps::new(u.grid());
    let d = ops.derivatives(&u.to_vec());
    let mut g = SymTensorField2::zeros(u.grid());
    for k in 0..g.t11.len() {
        g.set_node(k, d.kappa(k));
    }
    g
}

/// Displacement of the material point at height `x3`:
/// `(u1 - x3 w_{,1}, u2 - x3 w_{,2}, w)`.
pub fn kl_displacement(u: &PlateState, x3: f64, thickness: f64) -> Result<[ScalarField2; 3]> {
    if !(x3.abs() <= 0.5 * thickness) {
        return Err(Error::Range(format!("x3 = {x3} outside [-{0}, {0}]", 0.5 * thickness)));
    }
    let ops = PlateOps::new(u.grid());
    let d = ops.derivatives(&u.to_vec());
    let g = u.grid();
    let a = u.u1.values.iter().zip(&d.wx).map(|(v, s)| v - x3 * s).collect();
    let b = u.u2.values.iter().zip(&d.wy).map(|(v, s)| v - x3 * s).collect();
    Ok([ScalarField2::from_values(g, a), ScalarField2::from_values(g, b), u.w.clone()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2 {
        Grid2::unit_square(33).unwrap()
    }

    fn interior(g: &Grid2, k: usize) -> bool {
        let (i, j) = g.ij(k);
        i >= 2 && j >= 2 && i + 2 < g.nx && j + 2 < g.ny
    }

    #[test]
    fn gamma_examples() {
        let g = grid();
        let z = gamma(&PlateState::zeros(g));
        assert_eq!(z.max_abs(), 0.0);

        let mut s = PlateState::zeros(g);
        s.u1 = ScalarField2::from_fn(g, |x, _| x);
        let gm = gamma(&s);
        for k in 0..g.len() {
            assert!((gm.t11[k] - 1.0).abs() < 1e-12 && gm.t22[k] == 0.0 && gm.t12[k].abs() < 1e-12);
        }

        let mut s = PlateState::zeros(g);
        s.w = ScalarField2::from_fn(g, |x, _| x * x);
        let gm = gamma(&s);
        for k in (0..g.len()).filter(|&k| interior(&g, k)) {
            let (x, _) = g.coords(k);
            assert!((gm.t11[k] - 2.0 * x * x).abs() < 1e-12);
            assert!(gm.t22[k].abs() < 1e-12 && gm.t12[k].abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_examples() {
        let g = grid();
        let mut s = PlateState::zeros(g);
        s.w = ScalarField2::from_fn(g, |x, _| x * x);
        let k2 = kappa(&s);
        s.w = ScalarField2::from_fn(g, |x, y| x * y);
        let kxy = kappa(&s);
        for k in (0..g.len()).filter(|&k| interior(&g, k)) {
            assert!((k2.t11[k] + 2.0).abs() < 1e-11 && k2.t22[k].abs() < 1e-11 && k2.t12[k].abs() < 1e-11);
            assert!((kxy.t12[k] + 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn kappa_trig_is_second_order() {
        let pi = std::f64::consts::PI;
        let err = |n: usize| {
            let g = Grid2::unit_square(n).unwrap();
            let mut s = PlateState::zeros(g);
            s.w = ScalarField2::from_fn(g, |x, y| (pi * x).sin() * (pi * y).sin());
            let k = kappa(&s);
            (0..g.len())
                .filter(|&k| interior(&g, k))
                .map(|n| {
                    let (x, y) = g.coords(n);
                    (k.t11[n] - pi * pi * (pi * x).sin() * (pi * y).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(33), err(65));
        assert!(e1 < 5e-2, "{e1}");
        assert!(e1 / e2 > 3.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn kl_displacement_examples() {
        let g = grid();
        let mut s = PlateState::zeros(g);
        s.u1 = ScalarField2::from_fn(g, |x, _| x);
        s.w = ScalarField2::from_fn(g, |x, y| x * y);
        let [a, b, c] = kl_displacement(&s, 0.0, 1.0).unwrap();
        assert_eq!((a, b, c), (s.u1.clone(), s.u2.clone(), s.w.clone()));

        let mut s = PlateState::zeros(g);
        s.w = ScalarField2::from_fn(g, |x, _| x);
        let [a, _, c] = kl_displacement(&s, 0.5, 1.0).unwrap();
        assert!(a.values.iter().all(|v| (v + 0.5).abs() < 1e-12));
        assert_eq!(c, s.w);

        let mut s = PlateState::zeros(g);
        s.u1 = ScalarField2::from_fn(g, |x, _| x);
        s.w = ScalarField2::from_fn(g, |x, _| x * x);
        let [a, _, _] = kl_displacement(&s, 0.1, 1.0).unwrap();
        for k in (0..g.len()).filter(|&k| interior(&g, k)) {
            let (x, _) = g.coords(k);
            assert!((a.values[k] - 0.8 * x).abs() < 1e-12);
        }
        assert!(matches!(kl_displacement(&s, 0.6, 1.0), Err(Error::Range(_))));
    }

    #[test]
    fn mode_partition_mismatch() {
        let g = grid();
        assert!(PlateMode::Clamped.check_grid(&g).is_ok());
        assert!(matches!(PlateMode::Mixed.check_grid(&g), Err(Error::Config(_))));
        let m = Grid2::new(9, 9, 1.0, 1.0, crate::fields::BoundaryPartition::west_south_clamped()).unwrap();
        assert!(matches!(PlateMode::Clamped.check_grid(&m), Err(Error::Config(_))));
        assert!(PlateMode::Mixed.check_grid(&m).is_ok());
    }

    #[test]
    fn state_round_trip_and_clamp() {
        let g = Grid2::unit_square(7).unwrap();
        let v: Vec<f64> = (0..3 * g.len()).map(|i| i as f64 + 1.0).collect();
        let mut s = PlateState::from_vec(g, &v).unwrap();
        assert_eq!(s.to_vec(), v);
        assert!(s.clamp_violation() > 0.0);
        s.enforce_clamp();
        assert_eq!(s.clamp_violation(), 0.0);
        // double layer: the first inner ring of w is fixed, u is free there
        assert_eq!(s.w.at(1, 3), 0.0);
        assert_ne!(s.u1.at(1, 3), 0.0);
        assert!(PlateState::from_vec(g, &v[1..]).is_err());
    }
}
