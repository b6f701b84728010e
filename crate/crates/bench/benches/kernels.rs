use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64 as C;
use sl3scatter::flat::grid::ChamberGrid;
use sl3scatter::flat::operator::assemble_radial;
use sl3scatter::flat::solve::{solve_resolvent, Reduction};
use sl3scatter::flat::spectral::SpectralParam;
use sl3scatter::product::distance::{smoothed_distance, ProductPoint};
use sl3scatter::product::model::{product_resolvent, ProductGrid, ProductMethod};
use sl3scatter::spherical::{two_body_fit, weyl_sum_coeffs, SpectralVector};

fn flat(c: &mut Criterion) {
    let grid = ChamberGrid::new(0.2, 10.0).unwrap();
    c.bench_function("assemble_radial", |b| {
        b.iter(|| assemble_radial(black_box(grid.clone())))
    });

    let op = assemble_radial(grid);
    let param = SpectralParam::new(C::new(-1.0, 0.0)).unwrap();
    let f = op
        .grid
        .sample(|z| C::new((-(z[0] * z[0] + z[1] * z[1])).exp(), 0.0));
    c.bench_function("apply_radial", |b| b.iter(|| op.apply(black_box(&f))));
    c.bench_function("solve_resolvent", |b| {
        b.iter(|| solve_resolvent(&op, param, black_box(&f), Reduction::WeylInvariant).unwrap())
    });
}

fn product(c: &mut Criterion) {
    let grid = ProductGrid::new(6.0, 8.0, 40, 40).unwrap();
    let param = SpectralParam::new(C::new(-1.0, 0.0)).unwrap();
    let f = grid.sample(|a, b| C::new((-(a * a + (b - 3.0).powi(2))).exp(), 0.0));
    let mut g = c.benchmark_group("product_resolvent");
    g.sample_size(10);
    for (name, method) in [
        ("direct", ProductMethod::Direct),
        ("spectral", ProductMethod::Spectral),
        ("contour", ProductMethod::Contour),
    ] {
        g.bench_function(name, |b| {
            b.iter(|| product_resolvent(&grid, &param, black_box(&f), method).unwrap())
        });
    }
    g.finish();

    let p = ProductPoint::new(0.3, 1.2, 0.4);
    let q = ProductPoint::new(-1.1, 2.5, 2.0);
    c.bench_function("smoothed_distance", |b| {
        b.iter(|| smoothed_distance(black_box(&p), black_box(&q)))
    });
}

fn spherical(c: &mut Criterion) {
    c.bench_function("two_body_fit", |b| {
        b.iter(|| two_body_fit(black_box(C::new(0.7, 0.4)), 3.0).unwrap())
    });
    let xi = SpectralVector::along(C::new(-0.4, 1.2), 25f64.to_radians()).unwrap();
    c.bench_function("weyl_sum_coeffs", |b| {
        b.iter(|| weyl_sum_coeffs(black_box(&xi)).unwrap())
    });
}

criterion_group!(benches, flat, product, spherical);
criterion_main!(benches);
