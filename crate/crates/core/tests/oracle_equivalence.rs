use std::time::Instant;

use platedual_core::constitutive::{build_bending_tensor, build_membrane_tensor};
use platedual_core::oracle::coordinate_descent;
use platedual_core::plate::PlateProblem;
use platedual_core::solver::minimize;
use platedual_core::{Grid2, LameParams, LoadSet, Objective, PlateMode, SolveOptions};

#[test]
fn solver_and_coordinate_descent_agree() {
    let lp = LameParams::new(1.0, 1.0, 1.0).unwrap();
    let h = build_membrane_tensor(&lp).unwrap();
    let g = Grid2::unit_square(17).unwrap();
    let pr = PlateProblem::new(h, build_bending_tensor(&h, &lp), LoadSet::transverse(g, 50.0), PlateMode::Clamped).unwrap();
    let tol = 1e-9;
    let cp = minimize(&pr, &vec![0.0; pr.dim()], &SolveOptions { grad_tol: tol, ..Default::default() }).unwrap();
    let t = Instant::now();
    let or = coordinate_descent(&pr, &vec![0.0; pr.dim()], tol, 200_000).unwrap();
    eprintln!("oracle: {} sweeps, {:?}, J {:.15e} vs {:.15e}", or.sweeps, t.elapsed(), or.value, cp.value);
    assert!(or.converged);
    assert!((or.value - cp.value).abs() <= 1e-6 * cp.value.abs());
}
