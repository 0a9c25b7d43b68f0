use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotor_core::bessel;
use rotor_core::fourier::FourierHamiltonian;
use rotor_core::harness::{generate_graph, GraphSpec};
use rotor_core::vmc::{estimate_energy_and_gradient, metropolis_sweep, sr_step, Sampler, SamplerSettings, SrSettings};
use rotor_core::{RbmCache, RbmParams, RotorConfig};

fn bench_operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_hamiltonian");
    for (n, w) in [(3, 10), (4, 5), (5, 5)] {
        let g = generate_graph(&GraphSpec::chain(n)).unwrap();
        let op = FourierHamiltonian::new(&g, w).unwrap();
        let len = op.len();
        let psi: Vec<f64> = (0..len).map(|k| (k as f64).sin()).collect();
        let mut out = vec![0.0; len];
        group.bench_with_input(BenchmarkId::new("chain", format!("n{n}_w{w}")), &psi, |b, psi| {
            b.iter(|| op.apply_into(black_box(psi), &mut out));
        });
    }
    group.finish();
}

fn bench_bessel(c: &mut Criterion) {
    let xs: Vec<f64> = (0..1024).map(|k| 0.05 * k as f64).collect();
    c.bench_function("bessel_kernels_1024", |b| {
        b.iter(|| xs.iter().map(|&x| bessel::kernels(black_box(x)).1).sum::<f64>());
    });
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("metropolis_sweep");
    for (n, m) in [(4, 20), (10, 40)] {
        let params = RbmParams::random(m, n, 0.1, 1);
        let mut cache = RbmCache::new(&params, RotorConfig::zeros(n)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        group.bench_function(format!("n{n}_m{m}"), |b| {
            b.iter(|| metropolis_sweep(&params, &mut cache, 1.0, &mut rng));
        });
    }
    group.finish();
}

fn bench_sr_step(c: &mut Criterion) {
    let n = 10;
    let g = generate_graph(&GraphSpec::chain(n)).unwrap();
    let params = RbmParams::random(20, n, 0.1, 1);
    let settings = SamplerSettings { total_samples: 2_000, burn_in: 200, thin: 2, ..Default::default() };
    let mut sampler = Sampler::new(&params, settings).unwrap();
    let est = estimate_energy_and_gradient(&g, &params, &mut sampler).unwrap();
    let sr = SrSettings::default();
    c.bench_function("sr_step_p280_900_samples", |b| {
        b.iter(|| sr_step(&params, &est.force, &est.metric, &sr).unwrap());
    });
}

criterion_group!(benches, bench_operator, bench_bessel, bench_sweep, bench_sr_step);
criterion_main!(benches);
