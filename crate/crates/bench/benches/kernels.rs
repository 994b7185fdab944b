use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use srbench_bench::fixture_field;
use srbench_core::ingest::coarsen_subsample;
use srbench_core::interp::{upsample, KernelKind};
use srbench_core::metrics::{ssim, SsimParams};
use srbench_core::spectrum::{energy_spectrum, SpectrumOptions};
use srbench_core::variogram::semivariogram;
use srbench_core::VariableKind;

fn spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("energy_spectrum");
    for n in [100usize, 256, 512] {
        let ua = fixture_field(n, n, VariableKind::Ua);
        let va = fixture_field(n, n, VariableKind::Va);
        group.throughput(Throughput::Elements((n * n) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                energy_spectrum(black_box(&ua), black_box(&va), SpectrumOptions::default()).unwrap()
            })
        });
    }
    group.finish();
}

fn variogram(c: &mut Criterion) {
    let mut group = c.benchmark_group("semivariogram_20km");
    group.sample_size(20);
    for n in [100usize, 256] {
        let f = fixture_field(n, n, VariableKind::Dni);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| semivariogram(black_box(&f), 20.0, 2.0).unwrap())
        });
    }
    group.finish();
}

fn interpolation(c: &mut Criterion) {
    let hr = fixture_field(500, 500, VariableKind::Ua);
    let lr = coarsen_subsample(&hr, 5).unwrap();
    let mut group = c.benchmark_group("upsample_x5_100_to_500");
    for k in [
        KernelKind::Nearest,
        KernelKind::Bilinear,
        KernelKind::Bicubic,
    ] {
        group.bench_function(k.to_string(), |b| {
            b.iter(|| upsample(black_box(&lr), 5, k.into()).unwrap())
        });
    }
    group.finish();
}

fn structural_similarity(c: &mut Criterion) {
    let hr = fixture_field(100, 100, VariableKind::Dhi);
    let sr = upsample(
        &coarsen_subsample(&hr, 5).unwrap(),
        5,
        KernelKind::Bicubic.into(),
    )
    .unwrap();
    let params = SsimParams::with_range(hr.data_range().span());
    c.bench_function("ssim_100", |b| {
        b.iter(|| ssim(black_box(&sr), black_box(&hr), &params).unwrap())
    });
}

criterion_group!(
    benches,
    spectrum,
    variogram,
    interpolation,
    structural_similarity
);
criterion_main!(benches);
