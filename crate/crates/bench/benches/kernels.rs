use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stabscope_bench::random_state;
use stabscope_core::oracles::stabilizer_fidelity;
use stabscope_core::pauli_spectrum;
use stabscope_core::rng::rng_from_seed;
use stabscope_core::stabilizer::sample_random_clifford;

fn spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("pauli_spectrum");
    g.sample_size(10);
    for n in [6, 8, 10, 12] {
        let psi = random_state(n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| {
            b.iter(|| pauli_spectrum(psi).unwrap())
        });
    }
    g.finish();
}

fn clifford_sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_random_clifford");
    for n in [2, 6, 12] {
        let mut rng = rng_from_seed(2);
        g.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| sample_random_clifford(n, &mut rng).unwrap())
        });
    }
    g.finish();
}

fn fstab(c: &mut Criterion) {
    let mut g = c.benchmark_group("stabilizer_fidelity");
    g.sample_size(10);
    for n in [2, 3, 4] {
        let psi = random_state(n, 3);
        g.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| {
            b.iter(|| stabilizer_fidelity(psi).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, spectrum, clifford_sampling, fstab);
criterion_main!(benches);
