//! Sequential vs parallel execution of the amplitude kernels, one drive
//! period on both engines, and an instance-level ensemble map.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dtc_core::exec::{self, ExecMode};
use dtc_core::gate::hadamard;
use dtc_core::kernels;
use dtc_core::protocols::spin_glass_chi;
use dtc_core::rng::{derive_seed, rng_from_seed};
use dtc_core::{density_from_state, haar_random_state, make_bitstring_state, sample_disorder, NoiseModel, NoisyCycle, PreparedCycle};
use std::hint::black_box;

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn kernel_benches(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_1q");
    for n in [14usize, 18, 20] {
        let psi = haar_random_state(n, &mut rng_from_seed(1)).unwrap();
        let m = hadamard();
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                let mut amps = psi.amps().to_vec();
                b.iter(|| kernels::apply_1q(black_box(&mut amps), n / 2, &m, mode));
            });
        }
    }
    group.finish();
}

fn cycle_benches(c: &mut Criterion) {
    let mut group = c.benchmark_group("pure_period");
    for l in [16usize, 20] {
        let inst = sample_disorder(l, 0.94, 3).unwrap();
        let cycle = PreparedCycle::new(&inst);
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, l), &l, |b, _| {
                let mut s = make_bitstring_state(&vec![0; l]).unwrap().with_mode(mode);
                b.iter(|| cycle.apply(black_box(&mut s)).unwrap());
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("noisy_period");
    group.sample_size(20);
    for l in [8usize, 10] {
        let inst = sample_disorder(l, 0.94, 3).unwrap();
        let cycle = NoisyCycle::new(&inst, NoiseModel::after_gates(0.005).unwrap()).unwrap();
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, l), &l, |b, _| {
                let mut dm = density_from_state(&make_bitstring_state(&vec![0; l]).unwrap()).unwrap().with_mode(mode);
                b.iter(|| cycle.apply(black_box(&mut dm)).unwrap());
            });
        }
    }
    group.finish();
}

fn ensemble_benches(c: &mut Criterion) {
    let mut group = c.benchmark_group("ensemble_chi");
    group.sample_size(10);
    let l = 10;
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new(name, 32), |b| {
            b.iter(|| {
                exec::map_range(mode, 32, |i| {
                    let inst = sample_disorder(l, 0.9, derive_seed(5, i as u64)).unwrap();
                    spin_glass_chi(&inst, &vec![0; l], (20, 30), None, true).unwrap().chi
                })
            });
        });
    }
    group.finish();
}

criterion_group!(benches, kernel_benches, cycle_benches, ensemble_benches);
criterion_main!(benches);
