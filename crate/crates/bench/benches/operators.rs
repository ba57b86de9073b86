//! Throughput benchmarks for the hot paths: fractional Laplacian (spectral
//! vs quadrature), extremal operators, sup-convolution and solver steps.

use criterion::{criterion_group, criterion_main, Criterion};
use std::f64::consts::PI;

use fhjlab_core::convolution::{sup_convolution, ConvolutionParam};
use fhjlab_core::evolve::{run_advection_diffusion, DriftField, SolverConfig};
use fhjlab_core::nonlocal::{
    extremal_plus, frac_laplacian_quadrature, frac_laplacian_spectral,
};
use fhjlab_core::{EllipticityBounds, FractionalOrder, Grid, QuadratureScheme, ScalarField};

fn bench_operators(c: &mut Criterion) {
    let g = Grid::new(1, 512, 2.0 * PI).unwrap();
    let f = ScalarField::sample(g, |p| p[0].cos() + 0.5 * (3.0 * p[0]).sin()).unwrap();
    let s = FractionalOrder::new(0.5).unwrap();
    let scheme = QuadratureScheme::default_for(&g);
    let bounds = EllipticityBounds::new(0.5, 2.0).unwrap();

    c.bench_function("fraclap_spectral_512", |b| {
        b.iter(|| frac_laplacian_spectral(&f, s).unwrap())
    });
    c.bench_function("fraclap_quadrature_512", |b| {
        b.iter(|| frac_laplacian_quadrature(&f, s, &scheme).unwrap())
    });
    c.bench_function("extremal_plus_512", |b| {
        b.iter(|| extremal_plus(&f, bounds, &scheme).unwrap())
    });
    c.bench_function("sup_convolution_512", |b| {
        let p = ConvolutionParam::new(0.2).unwrap();
        b.iter(|| sup_convolution(&f, p))
    });
    c.bench_function("advection_diffusion_run_256", |b| {
        let g = Grid::new(1, 256, 2.0 * PI).unwrap();
        let u0 = ScalarField::sample(g, |p| p[0].cos()).unwrap();
        let drift = DriftField::constant(g, [0.5, 0.0], 1.0).unwrap();
        let cfg = SolverConfig::new(0.8, 0.1, 8, s).unwrap();
        b.iter(|| run_advection_diffusion(&u0, &drift, &cfg).unwrap())
    });
}

criterion_group!(benches, bench_operators);
criterion_main!(benches);
