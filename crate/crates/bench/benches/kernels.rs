//! Hot paths: the FFT representation change, one split-step of the
//! finite-rank evolution, a stationary S-matrix evaluation, the R_f
//! quadrature, and the exact free-sojourn arithmetic.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sojourn_core::propagation::friedrichs_evolve;
use sojourn_core::sojourn::friedrichs_free_sojourn;
use sojourn_core::{
    stationary, FriedrichsModel, Grid, LocalizationFunction, Profile, RankOnePotential,
    SojournConfig, WaveFunction,
};

fn fft_roundtrip(c: &mut Criterion) {
    let grid = Grid::new(8192, -48.0, 48.0).unwrap();
    let phi = WaveFunction::gaussian(grid, 0.0, 2.0, 2.0).normalized();
    c.bench_function("fft_roundtrip_8192", |b| {
        b.iter(|| {
            let mom = black_box(&phi).to_momentum().unwrap();
            black_box(mom.to_position().unwrap())
        })
    });
}

fn split_step(c: &mut Criterion) {
    let grid = Grid::new(8192, -48.0, 48.0).unwrap();
    let model = FriedrichsModel::new(
        vec![RankOnePotential::new(1.0, Profile::lorentzian())],
        &grid,
    )
    .unwrap();
    let phi = WaveFunction::gaussian(grid, 0.0, 0.0, 2.0).normalized();
    c.bench_function("strang_step_8192", |b| {
        b.iter(|| friedrichs_evolve(black_box(&phi), &model, 0.01, 0.01).unwrap())
    });
}

fn s_matrix_eval(c: &mut Criterion) {
    let grid = Grid::new(1024, -60.0, 60.0).unwrap();
    let model = FriedrichsModel::new(
        vec![
            RankOnePotential::new(0.8, Profile::hermite(0)),
            RankOnePotential::new(-0.5, Profile::hermite(1)),
        ],
        &grid,
    )
    .unwrap();
    c.bench_function("s_matrix_rank2", |b| {
        b.iter(|| stationary::s_matrix(&model, black_box(0.7)).unwrap())
    });
}

fn r_f_quadrature(c: &mut Criterion) {
    let f = LocalizationFunction::make_plateau_bump(3, 1.0, 1.0).unwrap();
    let x = [0.8, -1.3, 0.4];
    c.bench_function("r_f_dim3", |b| {
        b.iter(|| f.r_f(black_box(&x), 1e-10).unwrap())
    });
}

fn free_sojourn_exact(c: &mut Criterion) {
    let grid = Grid::new(8192, -48.0, 48.0).unwrap();
    let phi = WaveFunction::gaussian(grid, 0.0, 0.0, 2.0).normalized();
    let f = LocalizationFunction::make_plateau_bump(1, 1.0, 1.0).unwrap();
    let mut cfg = SojournConfig::new(vec![8.0]).unwrap();
    cfg.t_cutoff_factor = 4.0;
    c.bench_function("free_sojourn_exact_8192", |b| {
        b.iter(|| friedrichs_free_sojourn(black_box(&phi), &f, 8.0, &cfg).unwrap())
    });
}

criterion_group!(
    benches,
    fft_roundtrip,
    split_step,
    s_matrix_eval,
    r_f_quadrature,
    free_sojourn_exact
);
criterion_main!(benches);
