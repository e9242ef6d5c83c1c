use criterion::{black_box, criterion_group, criterion_main, Criterion};
use wres_bench::conformal_metric;
use wres_core::spectral::{curved_t2_spectrum, fit_heat_coefficients, sphere_spectrum, sphere_zeta_residue};

fn spectra(c: &mut Criterion) {
    let g = conformal_metric(2, 0.1);
    let mut group = c.benchmark_group("curved T2 eigensolve");
    group.sample_size(10);
    for grid in [16, 24] {
        group.bench_function(format!("grid {grid}"), |b| b.iter(|| curved_t2_spectrum(black_box(&g), grid).unwrap()));
    }
    group.finish();

    let s4 = sphere_spectrum(4, 2000).unwrap();
    c.bench_function("heat fit S4 L=2000", |b| {
        b.iter(|| fit_heat_coefficients(black_box(&s4), 4, 4, (2e-4, 5e-3), 32).unwrap())
    });
    c.bench_function("sphere zeta residue S4 k=2", |b| b.iter(|| sphere_zeta_residue(4, black_box(2), 8).unwrap()));
}

criterion_group!(benches, spectra);
criterion_main!(benches);
