//! Frozen energy value from `oracles/energy3d_oracle.py`.

use std::f64::consts::PI;

use platedual_core::elasticity3d::{energy3d, ElasticLoads, ElasticMode, ElasticState};
use platedual_core::{Grid3, ScalarField3, Tensor3D};

const FROZEN: f64 = 0.3035731116671827;

#[test]
fn smooth_clamped_state_matches_frozen_value() {
    let g = Grid3::unit_cube(9).unwrap();
    let s = |x: [f64; 3]| (PI * x[0]).sin() * (PI * x[1]).sin() * (PI * x[2]).sin();
    let mut u = ElasticState::zeros(g);
    u.u[0] = ScalarField3::from_fn(g, |x| 0.2 * s(x) * (1.0 + x[0]));
    u.u[1] = ScalarField3::from_fn(g, |x| 0.1 * (PI * x[0]).sin() * (2.0 * PI * x[1]).sin() * (PI * x[2]).sin());
    u.u[2] = ScalarField3::from_fn(g, |x| -0.15 * s(x));
    let clamp = g.clamp_mask();
    for f in u.u.iter_mut() {
        for (v, c) in f.values.iter_mut().zip(&clamp) {
            if *c {
                *v = 0.0;
            }
        }
    }
    let mut loads = ElasticLoads::zeros(g);
    loads.p[0] = ScalarField3::from_fn(g, |_| 1.0);
    loads.p[1] = ScalarField3::from_fn(g, |x| 0.5 * x[1]);
    loads.p[2] = ScalarField3::from_fn(g, |_| -2.0);
    let h = Tensor3D::isotropic(1.5, 0.7).unwrap();
    let e = energy3d(&u, &h, &loads, ElasticMode::Clamped).unwrap();
    assert!((e.total - FROZEN).abs() <= 1e-12 * FROZEN.abs(), "{} vs {FROZEN}", e.total);
}
