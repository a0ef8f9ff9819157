//! Energy assembly through the chunked data-parallel reducer against a
//! plain sequential sum, plus the planar transform. Build with
//! `--no-default-features` to time the sequential fallback.

use criterion::{criterion_group, criterion_main, Criterion};
use fraclab_kernel::SmoothField;
use fraclab_measures::SphericalMeasure;
use fraclab_spectral::{energy, forward, GridFunction, GridMeta, MultiplierGrid};
use std::hint::black_box;

fn bench_energy(c: &mut Criterion) {
    let meta = GridMeta::new(1, 65_536, 64.0).unwrap();
    let u = GridFunction::from_field(meta, &SmoothField::bump_1d()).unwrap();
    let sigma = SphericalMeasure::uniform(1).unwrap();
    let mult = MultiplierGrid::single(meta, &sigma, 0.6).unwrap();

    let mut group = c.benchmark_group("energy-1d");
    group.sample_size(20);
    group.bench_function("reducer", |b| {
        b.iter(|| energy(black_box(&u), black_box(&u), &mult).unwrap())
    });
    group.bench_function("serial-sum", |b| {
        b.iter(|| {
            let spec = forward(black_box(&u));
            let w = spec.plancherel_weight();
            let mut acc = 0.0;
            for (k, coeff) in spec.coeffs().iter().enumerate() {
                acc += mult.value_at(k) * coeff.norm_sqr();
            }
            acc * w
        })
    });
    group.finish();
}

fn bench_planar_transform(c: &mut Criterion) {
    let meta = GridMeta::new(2, 256, 16.0).unwrap();
    let u = GridFunction::from_field(meta, &SmoothField::tensor_bump_2d()).unwrap();

    let mut group = c.benchmark_group("transform-2d");
    group.sample_size(20);
    group.bench_function("forward-256", |b| b.iter(|| forward(black_box(&u))));
    group.finish();
}

criterion_group!(benches, bench_energy, bench_planar_transform);
criterion_main!(benches);
