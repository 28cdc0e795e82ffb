use platedual_core::constitutive::{
    build_bending_tensor, build_membrane_tensor, invert_sym4, nk_inverse_field, sym2_inverse,
};
use platedual_core::fields::{integrate_domain, sbp_diff1, Axis, BoundaryPart, BoundaryPartition, Grid2};
use platedual_core::plate::PlateProblem;
use platedual_core::{LameParams, LoadSet, Objective, PlateMode, ScalarField2, SymTensorField2, Tensor3D};
use proptest::prelude::*;

fn lame() -> impl Strategy<Value = LameParams> {
    (0.1f64..10.0, 0.1f64..10.0, 0.1f64..2.0).prop_map(|(l, m, h)| LameParams::new(l, m, h).unwrap())
}

fn sym2() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-5.0f64..5.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn membrane_inverse_round_trips(p in lame(), e in sym2()) {
        let h = build_membrane_tensor(&p).unwrap();
        let inv = invert_sym4(&h).unwrap();
        let back = inv.apply(h.apply(e));
        for c in 0..3 {
            prop_assert!((back[c] - e[c]).abs() <= 1e-10 * (1.0 + e[c].abs()));
        }
    }

    #[test]
    fn fenchel_young_inequality(p in lame(), e in sym2(), s in sym2()) {
        let h = build_bending_tensor(&build_membrane_tensor(&p).unwrap(), &p);
        let inv = invert_sym4(&h).unwrap();
        let pair = e[0] * s[0] + e[1] * s[1] + 2.0 * e[2] * s[2];
        let lhs = 0.5 * h.quad(e) + 0.5 * inv.quad(s);
        prop_assert!(lhs >= pair - 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn isotropic_3d_inverse(l in 0.1f64..10.0, m in 0.1f64..10.0, e in prop::array::uniform6(-3.0f64..3.0)) {
        let h = Tensor3D::isotropic(l, m).unwrap();
        let back = h.inverse().unwrap().apply(&h.apply(&e));
        for c in 0..6 {
            prop_assert!((back[c] - e[c]).abs() <= 1e-10 * (1.0 + e[c].abs()));
        }
        prop_assert!((h.min_eigenvalue() - 2.0 * m.min(1.5 * l + m)).abs() <= 1e-10 * (1.0 + l + m));
    }

    #[test]
    fn nk_inverse_is_an_inverse(n in sym2(), k in 0.0f64..20.0) {
        let a = [n[0] + k, n[1] + k, n[2]];
        let det = a[0] * a[1] - a[2] * a[2];
        prop_assume!(a[0] > 1e-3 && det > 1e-3);
        let g = Grid2::unit_square(5).unwrap();
        let mut f = SymTensorField2::zeros(g);
        f.set_node(0, n);
        let inv = nk_inverse_field(&f, k.max(1e-300)).unwrap().node(0);
        let direct = sym2_inverse(a).unwrap();
        for c in 0..3 {
            prop_assert!((inv[c] - direct[c]).abs() <= 1e-10 * (1.0 + direct[c].abs()));
        }
    }

    #[test]
    fn summation_by_parts_is_exact(
        nx in 5usize..12, ny in 5usize..12,
        f in prop::collection::vec(-1.0f64..1.0, 144),
        g in prop::collection::vec(-1.0f64..1.0, 144),
    ) {
        let grid = Grid2::new(nx, ny, 1.3, 0.7, BoundaryPartition::clamped()).unwrap();
        let n = grid.len();
        let ff = ScalarField2::from_values(grid, f[..n].to_vec());
        let gg = ScalarField2::from_values(grid, g[..n].to_vec());
        for axis in [Axis::X, Axis::Y] {
            let df = sbp_diff1(&ff, axis);
            let dg = sbp_diff1(&gg, axis);
            let vol = integrate_domain(&ScalarField2::from_values(grid, (0..n).map(|k| df.values[k] * gg.values[k] + ff.values[k] * dg.values[k]).collect()));
            let (n1, n2) = grid.weighted_normals(BoundaryPart::All);
            let nrm = if axis == Axis::X { n1 } else { n2 };
            let bnd: f64 = (0..n).map(|k| nrm[k] * ff.values[k] * gg.values[k]).sum();
            prop_assert!((vol - bnd).abs() <= 1e-12 * (1.0 + bnd.abs()));
        }
    }

    #[test]
    fn plate_line_polynomial_matches_energy(
        x in prop::collection::vec(-0.05f64..0.05, 3 * 81),
        d in prop::collection::vec(-1.0f64..1.0, 3 * 81),
        t in 1e-3f64..0.5,
    ) {
        let p = LameParams::new(1.0, 1.0, 1.0).unwrap();
        let h = build_membrane_tensor(&p).unwrap();
        let g = Grid2::unit_square(9).unwrap();
        let pr = PlateProblem::new(h, build_bending_tensor(&h, &p), LoadSet::transverse(g, 2.0), PlateMode::Clamped).unwrap();
        let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
        let direct = pr.value(&y) - pr.value(&x);
        let poly = pr.line_delta(&x, &d, t);
        prop_assert!((direct - poly).abs() <= 1e-9 * (1.0 + direct.abs()));
    }
}
