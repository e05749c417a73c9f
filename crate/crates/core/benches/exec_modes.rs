use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qsector::algebra::StructureConstants;
use qsector::equivalence::{born_sweep, spectrally_equivalent_with, StateFamily};
use qsector::random::SeededRng;
use qsector::sector::commutant_with;
use qsector::{ideal_measurement, pvm_from_observable, CMatrix, Exec, StarAlgebra, State};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn rotated(rng: &mut SeededRng, blocks: &[usize]) -> StarAlgebra {
    let base = StarAlgebra::direct_sum(blocks).unwrap();
    let u = rng.unitary(base.ambient_dim());
    let gens: Vec<CMatrix> = base.basis().iter().map(|b| &(&u * b) * &u.adjoint()).collect();
    StarAlgebra::generate(&gens, base.ambient_dim()).unwrap()
}

fn family(rng: &mut SeededRng, d: usize, n: usize) -> StateFamily {
    StateFamily::new((0..n).map(|_| State::from_density(rng.density(d)).unwrap()).collect(), "bench").unwrap()
}

fn structure_constants(c: &mut Criterion) {
    let mut rng = SeededRng::new(1);
    let alg = rotated(&mut rng, &[3, 2, 1]);
    let mut group = c.benchmark_group("structure_constants");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, alg.dim()), |b| {
            b.iter(|| StructureConstants::compute(black_box(&alg), exec))
        });
    }
    group.finish();
}

fn commutant(c: &mut Criterion) {
    let mut rng = SeededRng::new(2);
    let alg = rotated(&mut rng, &[2, 2, 1, 1]);
    let mut group = c.benchmark_group("commutant");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, alg.ambient_dim()), |b| {
            b.iter(|| commutant_with(black_box(&alg), exec).unwrap())
        });
    }
    group.finish();
}

fn spectral_equivalence(c: &mut Criterion) {
    let mut rng = SeededRng::new(3);
    let spectrum = [-1.0, 0.0, 1.0, 2.0, 3.0, 4.0];
    let e1 = pvm_from_observable(&rng.observable_with_spectrum(&spectrum), 1e-7).unwrap();
    let e2 = pvm_from_observable(&rng.observable_with_spectrum(&spectrum), 1e-7).unwrap();
    let members = family(&mut rng, spectrum.len(), 64);
    let mut group = c.benchmark_group("spectral_equivalence");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, members.len()), |b| {
            b.iter(|| spectrally_equivalent_with(black_box(&e1), &e2, &members, 1e-9, exec).unwrap())
        });
    }
    group.finish();
}

fn born(c: &mut Criterion) {
    let mut rng = SeededRng::new(4);
    let pvm = pvm_from_observable(&rng.observable_with_spectrum(&[-1.0, 0.5, 2.0, 3.5]), 1e-7).unwrap();
    let m = ideal_measurement(&pvm);
    let members = family(&mut rng, 4, 16);
    let mut group = c.benchmark_group("born_sweep");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, members.len()), |b| {
            b.iter(|| born_sweep(black_box(&m), &members, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, structure_constants, commutant, spectral_equivalence, born);
criterion_main!(benches);
