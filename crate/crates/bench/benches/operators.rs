use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use platedual_core::constitutive::{build_bending_tensor, build_membrane_tensor, invert_sym4};
use platedual_core::dual::C0Operator;
use platedual_core::elasticity3d::build_t3d;
use platedual_core::plate::{build_t_field, PlateOps, PlateProblem};
use platedual_core::rng::{sample_rng, uniform_vec};
use platedual_core::solver::minimize;
use platedual_core::{
    ElasticLoads, ElasticMode, ElasticProblem, Grid2, Grid3, LameParams, LoadSet, Objective, PlateMode, SolveOptions,
    Tensor3D,
};

fn plate(n: usize, p: f64) -> PlateProblem {
    let lp = LameParams::new(1.0, 1.0, 1.0).unwrap();
    let h = build_membrane_tensor(&lp).unwrap();
    let g = Grid2::unit_square(n).unwrap();
    PlateProblem::new(h, build_bending_tensor(&h, &lp), LoadSet::transverse(g, p), PlateMode::Clamped).unwrap()
}

fn elastic(n: usize) -> ElasticProblem {
    let g = Grid3::unit_cube(n).unwrap();
    let h = Tensor3D::isotropic(1.5, 0.7).unwrap();
    ElasticProblem::new(h, ElasticLoads::body(g, [0.3, -0.2, -1.0]), ElasticMode::Clamped).unwrap()
}

fn energy_and_gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("plate");
    for n in [17, 33, 65] {
        let pr = plate(n, 1.0);
        let x = uniform_vec(&mut sample_rng(1, 0), pr.dim(), 0.1);
        let mut g = vec![0.0; pr.dim()];
        group.bench_with_input(BenchmarkId::new("energy", n), &x, |b, x| b.iter(|| pr.value(black_box(x))));
        group.bench_with_input(BenchmarkId::new("gradient", n), &x, |b, x| b.iter(|| pr.gradient(black_box(x), &mut g)));
    }
    group.finish();

    let mut group = c.benchmark_group("elasticity3d");
    for n in [9, 17] {
        let pr = elastic(n);
        let x = uniform_vec(&mut sample_rng(2, 0), pr.dim(), 0.05);
        let mut g = vec![0.0; pr.dim()];
        group.bench_with_input(BenchmarkId::new("energy", n), &x, |b, x| b.iter(|| pr.value(black_box(x))));
        group.bench_with_input(BenchmarkId::new("gradient", n), &x, |b, x| b.iter(|| pr.gradient(black_box(x), &mut g)));
    }
    group.finish();
}

fn c0_and_certificates(c: &mut Criterion) {
    let lp = LameParams::new(1.0, 1.0, 1.0).unwrap();
    let h = build_membrane_tensor(&lp).unwrap();
    let hbar = invert_sym4(&build_bending_tensor(&h, &lp)).unwrap();
    let mut group = c.benchmark_group("c0");
    for n in [17, 33] {
        let g = Grid2::unit_square(n).unwrap();
        group.bench_function(BenchmarkId::new("factor", n), |b| b.iter(|| C0Operator::new(PlateOps::new(g), &hbar, 0.5).unwrap()));
        let op = C0Operator::new(PlateOps::new(g), &hbar, 0.5).unwrap();
        let y = uniform_vec(&mut sample_rng(3, 0), g.len(), 1.0);
        group.bench_function(BenchmarkId::new("solve", n), |b| b.iter(|| op.solve(black_box(&y))));
    }
    group.finish();

    let mut group = c.benchmark_group("certificate");
    let pr = plate(33, 1.0);
    group.bench_function("plate_33", |b| b.iter(|| build_t_field(&pr.loads, 1.0).unwrap()));
    let el = elastic(17);
    group.bench_function("elastic_17", |b| b.iter(|| build_t3d(&el.loads, 1.0).unwrap()));
    group.finish();
}

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let pr = plate(17, 1.0);
    let opts = SolveOptions::default();
    group.bench_function("plate_17", |b| b.iter(|| minimize(&pr, &vec![0.0; pr.dim()], &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, energy_and_gradient, c0_and_certificates, solve);
criterion_main!(benches);
