use super::*;
use crate::constitutive::{build_bending_tensor, build_membrane_tensor, LameParams};
use crate::fields::Grid2;
use crate::plate::PlateState;
use crate::rng::{low_mode_field, sample_rng};
use crate::solver::{minimize, Objective, SolveOptions};

fn problem(n: usize, p: f64) -> PlateProblem {
    let lp = LameParams::new(1.0, 1.0, 1.0).unwrap();
    let h = build_membrane_tensor(&lp).unwrap();
    let g = Grid2::unit_square(n).unwrap();
    PlateProblem::new(h, build_bending_tensor(&h, &lp), LoadSet::transverse(g, p), PlateMode::Clamped).unwrap()
}

fn solved(n: usize, p: f64) -> (PlateProblem, Vec<f64>) {
    let pr = problem(n, p);
    let cp = minimize(&pr, &vec![0.0; pr.dim()], &SolveOptions { grad_tol: 1e-9, ..Default::default() }).unwrap();
    assert!(cp.converged);
    (pr, cp.x)
}

fn ctx(pr: &PlateProblem) -> DualContext {
    DualContext::new(pr, 0.5).unwrap()
}

#[test]
fn extraction_of_zero_state() {
    let pr = problem(9, 1.0);
    let c = ctx(&pr);
    let dp = extract_dual(&c, &vec![0.0; pr.dim()], 1.0).unwrap();
    assert_eq!(dp, DualPoint::zeros(pr.ops.grid, 1.0));
}

#[test]
fn z_star_is_minus_k_w() {
    let pr = problem(9, 1.0);
    let c = ctx(&pr);
    let mut rng = sample_rng(1, 0);
    let mut x = vec![0.0; pr.dim()];
    let n = pr.n();
    x[2 * n..].copy_from_slice(&low_mode_field(&mut rng, &pr.ops.grid, 3));
    let dp = extract_dual(&c, &x, 1.0).unwrap();
    for i in 0..n {
        assert_eq!(dp.z_star.values[i], -x[2 * n + i]);
    }
}

#[test]
fn q_of_linear_deflection_without_membrane_force() {
    let pr = problem(9, 1.0);
    let c = ctx(&pr);
    let g = pr.ops.grid;
    let n = pr.n();
    let mut x = vec![0.0; 3 * n];
    for i in 0..n {
        let (xx, _) = g.coords(i);
        x[i] = -0.5 * xx;
        x[2 * n + i] = xx;
    }
    let k = 1.7;
    let dp = extract_dual(&c, &x, k).unwrap();
    assert!(dp.n.max_abs() < 1e-13);
    for i in 0..n {
        assert!((dp.q.x[i] - k).abs() < 1e-12 && dp.q.y[i].abs() < 1e-12);
    }
}

#[test]
fn g1_star_examples() {
    let pr = problem(9, 1.0);
    let c = ctx(&pr);
    let g = pr.ops.grid;
    let zero = SymTensorField2::zeros(g);
    assert_eq!(g1_star(&c, &zero, &vec![0.0; g.len()]), 0.0);
    let z: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.37).sin()).collect();
    let mut m = SymTensorField2::zeros(g);
    for k in 0..g.len() {
        m.set_node(k, [-z[k], -z[k], 0.0]);
    }
    assert_eq!(g1_star(&c, &m, &z), 0.0);
}

#[test]
fn g2_star_examples() {
    let pr = problem(9, 1.0);
    let c = ctx(&pr);
    let g = pr.ops.grid;
    let n0 = SymTensorField2::zeros(g);
    assert_eq!(g2_star(&c, &n0, &VectorField2::zeros(g), 1.0).unwrap(), 0.0);
    let mut q = VectorField2::zeros(g);
    q.x.iter_mut().for_each(|v| *v = 0.8);
    let k = 2.5;
    let v = g2_star(&c, &n0, &q, k).unwrap();
    assert!((v - 0.64 / (2.0 * k)).abs() < 1e-14);
    let mut bad = SymTensorField2::zeros(g);
    bad.t11[4] = -3.0;
    assert!(matches!(g2_star(&c, &bad, &q, 1.0), Err(Error::BStarViolation { node: 4, .. })));
}

#[test]
fn f_star_examples() {
    let pr = problem(9, 1.0);
    let c = ctx(&pr);
    let g = pr.ops.grid;
    assert_eq!(f_star(&c, &vec![3.0; g.len()], 1.0).unwrap(), 0.0);
    let z: Vec<f64> = (0..g.len()).map(|k| g.coords(k).0).collect();
    assert!((f_star(&c, &z, 2.0).unwrap() - 0.25).abs() < 1e-14);
    assert!(f_star(&c, &z, 0.0).is_err());
}

#[test]
fn j_star_scaling_in_q() {
    let pr = problem(9, 1.0);
    let c = ctx(&pr);
    let g = pr.ops.grid;
    assert_eq!(j_star(&c, &DualPoint::zeros(g, 1.0)).unwrap(), 0.0);
    let mut dp = DualPoint::zeros(g, 1.3);
    let mut rng = sample_rng(4, 0);
    dp.q.x = low_mode_field(&mut rng, &g, 3);
    dp.q.y = low_mode_field(&mut rng, &g, 3);
    let one = j_star(&c, &dp).unwrap();
    dp.q.x.iter_mut().chain(dp.q.y.iter_mut()).for_each(|v| *v *= 2.0);
    let two = j_star(&c, &dp).unwrap();
    assert!((two - 4.0 * one).abs() <= 1e-14 * one.abs());
}

#[test]
fn l_operator_examples() {
    let pr = problem(17, 1.0);
    let c = ctx(&pr);
    let g = pr.ops.grid;
    let zero = SymTensorField2::zeros(g);
    assert!(l_operator(&c, &zero, &vec![0.0; g.len()]).iter().all(|v| *v == 0.0));
    // M~ + z* delta = h : diag(x y^2, x^2)  =>  L = 2x - 2
    let mut m = SymTensorField2::zeros(g);
    for k in 0..g.len() {
        let (x, y) = g.coords(k);
        m.set_node(k, c.bending.apply([x * y * y, x * x, 0.0]));
    }
    let l = l_operator(&c, &m, &vec![0.0; g.len()]);
    for k in 0..g.len() {
        let (i, j) = g.ij(k);
        if i >= 2 && j >= 2 && i + 2 < g.nx && j + 2 < g.ny {
            assert!((l[k] - (2.0 * g.coords(k).0 - 2.0)).abs() < 1e-9);
        }
    }
}

#[test]
fn j1_correction_is_positive_off_the_identity() {
    let (pr, x) = solved(13, 5.0);
    let c = ctx(&pr);
    let mut dp = extract_dual(&c, &x, 1.0).unwrap();
    let js = j_star(&c, &dp).unwrap();
    assert!((j1_star(&c, &dp).unwrap() - js).abs() < 1e-12);
    assert_eq!(j1_star(&c, &DualPoint::zeros(pr.ops.grid, 1.0)).unwrap(), 0.0);
    let mut rng = sample_rng(8, 0);
    let bump = low_mode_field(&mut rng, &pr.ops.grid, 3);
    for (m, b) in dp.m_tilde.t11.iter_mut().zip(&bump) {
        *m += 0.1 * b;
    }
    let l = l_operator(&c, &dp.m_tilde, &dp.z_star.values);
    let corr = j1_star(&c, &dp).unwrap() - j_star(&c, &dp).unwrap();
    let oracle = 0.5 * (1.0 - 0.5) * {
        let s = c.c0.solve(&l);
        c.ops.integrate(s.iter().zip(&l).map(|(a, b)| a * b))
    };
    assert!(corr > 0.0);
    assert!((corr - oracle).abs() <= 1e-12 * oracle);
}

#[test]
fn j2_star_examples() {
    let pr = problem(13, 1.0);
    let c = ctx(&pr);
    let g = pr.ops.grid;
    assert_eq!(j2_star(&c, &vec![0.0; g.len()], 1.0).unwrap(), 0.0);
    let mut rng = sample_rng(2, 0);
    let mut z = low_mode_field(&mut rng, &g, 3);
    for (v, f) in z.iter_mut().zip(&c.free_w) {
        if !f {
            *v = 0.0;
        }
    }
    let a = j2_star(&c, &z, 1.0).unwrap();
    let z2: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
    assert!((j2_star(&c, &z2, 1.0).unwrap() - 4.0 * a).abs() <= 1e-13 * a.abs());
    assert!(a > 0.0);
}

#[test]
fn j3_star_examples() {
    let pr = problem(11, 1.0);
    let g = pr.ops.grid;
    let n = g.len();
    let mut rng = sample_rng(5, 0);
    let mut dp = DualPoint::zeros(g, 1.0);
    dp.n.t11 = low_mode_field(&mut rng, &g, 2).iter().map(|v| 0.2 * v).collect();
    dp.q.y = low_mode_field(&mut rng, &g, 2);
    dp.m_tilde.t12 = low_mode_field(&mut rng, &g, 2);
    dp.z_star.values = low_mode_field(&mut rng, &g, 2);
    // loads chosen so that v* is in A*
    let c0 = ctx(&pr);
    let [d1, d2] = c0.div_tensor(&dp.n);
    let m = c0.div2_tensor(&dp.m_tilde);
    let q = c0.div_vector(&dp.q);
    let mut loads = LoadSet::zeros(g);
    loads.p1.values = d1.iter().map(|v| -v).collect();
    loads.p2.values = d2.iter().map(|v| -v).collect();
    loads.p.values = (0..n).map(|k| m[k] - q[k]).collect();
    let pr2 = PlateProblem::new(pr.membrane, pr.bending, loads, PlateMode::Clamped).unwrap();
    let c = ctx(&pr2);
    let js = j_star(&c, &dp).unwrap();
    for s in 0..5 {
        let mut r = sample_rng(6, s);
        let x = crate::rng::uniform_vec(&mut r, 3 * n, 1.0);
        assert!((j3_star(&c, &dp, &x).unwrap() - js).abs() <= 1e-11 * (1.0 + js.abs()));
    }

    let pr3 = problem(11, 2.0);
    let c = ctx(&pr3);
    let mut x = vec![0.0; 3 * n];
    x[2 * n..].copy_from_slice(&low_mode_field(&mut rng, &g, 2));
    let expected = -2.0 * pr3.ops.integrate(x[2 * n..].iter().copied());
    let got = j3_star(&c, &DualPoint::zeros(g, 1.0), &x).unwrap();
    assert!((got - expected).abs() < 1e-14);
}

#[test]
fn airy_membrane_forces_are_self_equilibrated() {
    let pr = problem(17, 0.0);
    let c = ctx(&pr);
    let g = pr.ops.grid;
    let phi: Vec<f64> = (0..g.len())
        .map(|k| {
            let (x, y) = g.coords(k);
            (x * (1.0 - x) * y * (1.0 - y)).powi(2) * (1.0 + x)
        })
        .collect();
    let pyy = c.ops.gy(&c.ops.gy(&phi));
    let pxx = c.ops.gx(&c.ops.gx(&phi));
    let pxy = c.ops.gx(&c.ops.gy(&phi));
    let mut dp = DualPoint::zeros(g, 1.0);
    for k in 0..g.len() {
        dp.n.set_node(k, [pyy[k], pxx[k], -pxy[k]]);
    }
    let (rm, _) = equilibrium_residuals(&c, &dp);
    assert!(rm <= 1e-10, "{rm}");
}

#[test]
fn zero_dual_point_residuals_equal_loads() {
    let g = Grid2::unit_square(9).unwrap();
    let mut loads = LoadSet::transverse(g, 3.0);
    loads.p1 = crate::fields::ScalarField2::constant(g, -2.0);
    let pr0 = problem(9, 0.0);
    let pr = PlateProblem::new(pr0.membrane, pr0.bending, loads, PlateMode::Clamped).unwrap();
    let c = ctx(&pr);
    let (a, b) = equilibrium_residuals(&c, &DualPoint::zeros(g, 1.0));
    assert_eq!((a, b), (2.0, 3.0));
}

#[test]
fn converged_solve_satisfies_the_duality_relations() {
    let (pr, x) = solved(17, 200.0);
    let opts = VerifyOptions { weak_trials: 60, concavity_directions: 20, j2_samples: 30, ..Default::default() };
    let r = verify(&pr, &x, &opts).unwrap();
    for c in &r.checks {
        assert!(c.passed, "{c:?}");
    }
    assert!(r.stationarity.z_relation == 0.0);
    assert!(r.j_primal < 0.0);
}

#[test]
fn gap_grows_when_w0_is_perturbed() {
    let (pr, x) = solved(13, 50.0);
    let c = ctx(&pr);
    let dp = extract_dual(&c, &x, 1.0).unwrap();
    let g0 = duality_gap(pr.value(&x), j_star(&c, &dp).unwrap());
    let mut y = x.clone();
    let n = pr.n();
    let mut st = PlateState::from_vec(pr.ops.grid, &y).unwrap();
    for k in 0..n {
        let (a, b) = pr.ops.grid.coords(k);
        st.w.values[k] += 1e-2 * (a * (1.0 - a) * b * (1.0 - b)).powi(2) * 16.0;
    }
    st.enforce_clamp();
    y.copy_from_slice(&st.to_vec());
    let dp = extract_dual(&c, &y, 1.0).unwrap();
    let g1 = duality_gap(pr.value(&y), j_star(&c, &dp).unwrap());
    assert!(g1 > g0 && g1 > 1e-8, "{g0} {g1}");

    let pr0 = problem(9, 0.0);
    let c = ctx(&pr0);
    let dp = extract_dual(&c, &vec![0.0; pr0.dim()], 1.0).unwrap();
    assert_eq!(duality_gap(0.0, j_star(&c, &dp).unwrap()), 0.0);
}

#[test]
fn weak_duality_with_large_bubble() {
    let (pr, x) = solved(13, 20.0);
    let c = ctx(&pr);
    let dp = extract_dual(&c, &x, 1.0).unwrap();
    let js = j_star(&c, &dp).unwrap();
    let r = weak_duality_probe(&pr, &c, js, &x, 1.0, 1, 0.0, 0);
    assert!(r.max_excess.abs() <= 1e-12);
    let n = pr.n();
    let mut y = x.clone();
    for k in 0..n {
        let (a, b) = pr.ops.grid.coords(k);
        if c.free_w[k] {
            y[2 * n + k] += 10.0 * (a * (1.0 - a) * b * (1.0 - b));
        }
    }
    assert!(pr.value(&y) > js);
}

#[test]
fn concavity_in_closed_form_directions() {
    let pr = problem(11, 1.0);
    let c = ctx(&pr);
    let g = pr.ops.grid;
    let base = DualPoint::zeros(g, 1.0);
    let mut rng = sample_rng(12, 0);
    let zero = vec![0.0; g.len()];
    let mut d = SymTensorField2::zeros(g);
    d.t11 = low_mode_field(&mut rng, &g, 3);
    d.t12 = low_mode_field(&mut rng, &g, 3);
    let t = 0.1;
    let g1 = |s: f64| g1_star(&c, &base.m_tilde.axpy(s * t, &d), &zero);
    let sd = -(g1(1.0) - 2.0 * g1(0.0) + g1(-1.0));
    let exact = -t * t * c.ops.integrate((0..g.len()).map(|k| c.bending_inv.quad(d.node(k))));
    assert!((sd - exact).abs() <= 1e-12 * exact.abs() && sd < 0.0);

    let mut nn = SymTensorField2::zeros(g);
    nn.t11.iter_mut().for_each(|v| *v = 0.3);
    let dq = low_mode_field(&mut rng, &g, 3);
    let g2 = |s: f64| {
        let mut q = VectorField2::zeros(g);
        q.x = dq.iter().map(|v| s * t * v).collect();
        g2_star(&c, &nn, &q, 1.0).unwrap()
    };
    let sd = -(g2(1.0) - 2.0 * g2(0.0) + g2(-1.0));
    let exact = -t * t * c.ops.integrate(dq.iter().map(|v| v * v / 1.3));
    assert!((sd - exact).abs() <= 1e-12 * exact.abs() && sd < 0.0);

    let rep = concavity_probe(&c, &base, 20, 3).unwrap();
    assert_eq!(rep.violations, 0);
    assert!(rep.max_second_difference < 0.0);
}

#[test]
fn fenchel_young_on_random_pairs() {
    let pr = problem(9, 1.0);
    let c = ctx(&pr);
    let mut rng = sample_rng(21, 0);
    for _ in 0..200 {
        let v = crate::rng::uniform_vec(&mut rng, 6, 1.0);
        let e = [v[0], v[1], v[2]];
        let s = [v[3], v[4], v[5]];
        let g = 0.5 * c.bending.quad(e);
        let gs = 0.5 * c.bending_inv.quad(s);
        let pair = e[0] * s[0] + e[1] * s[1] + 2.0 * e[2] * s[2];
        assert!(g + gs >= pair - 1e-14);
        let s_opt = c.bending.apply(e);
        let eq = g + 0.5 * c.bending_inv.quad(s_opt) - (e[0] * s_opt[0] + e[1] * s_opt[1] + 2.0 * e[2] * s_opt[2]);
        assert!(eq.abs() < 1e-13);
    }
}

#[test]
fn k_selection_behaviour() {
    let (pr, x) = solved(13, 10.0);
    let c = ctx(&pr);
    let sel = select_k(&c, &x, KPolicy::Auto, 20, 0).unwrap();
    assert!(sel.ok && sel.k > 1.0);
    let big = select_k(&c, &x, KPolicy::Fixed(1e4), 20, 0).unwrap();
    assert!(!big.ok);
    let auto_from_big = select_k(&c, &x, KPolicy::Auto, 20, 0).unwrap();
    assert_eq!(sel, auto_from_big);
}

#[test]
fn mixed_mode_is_rejected() {
    let lp = LameParams::new(1.0, 1.0, 1.0).unwrap();
    let h = build_membrane_tensor(&lp).unwrap();
    let g = Grid2::new(9, 9, 1.0, 1.0, crate::fields::BoundaryPartition::west_south_clamped()).unwrap();
    let mut l = LoadSet::transverse(g, 1.0);
    l.eps1 = crate::fields::ScalarField2::constant(g, 1.0);
    l.eps2 = crate::fields::ScalarField2::constant(g, 1.0);
    let pr = PlateProblem::new(h, build_bending_tensor(&h, &lp), l, PlateMode::Mixed).unwrap();
    assert!(matches!(DualContext::new(&pr, 0.5), Err(Error::Config(_))));
}
