mod common;

use dtc_core::dense::{pauli_string, product_operator, Pauli};
use dtc_core::density::apply_kraus_dense;
use dtc_core::exec::{self, ExecMode};
use dtc_core::floquet::bond_sublayers;
use dtc_core::gate::{rx, rz, zz};
use dtc_core::heff::dense_cycle;
use dtc_core::protocols::autocorr::site_average;
use dtc_core::protocols::echo::run_echo_all;
use dtc_core::protocols::typicality::scrambled_sample;
use dtc_core::protocols::*;
use dtc_core::rng::{derive_seed, rng_from_seed, substream};
use dtc_core::state::index_to_bits;
use dtc_core::{
    apply_cycle, density_from_state, make_bitstring_state, sample_disorder, uniform_instance, DensityMatrix, DisorderInstance,
    KrausChannel, C64,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

type Op = DMatrix<C64>;

fn depolarize_op(op: &Op, n: usize, qubits: &[usize], p: f64) -> Op {
    let ch = KrausChannel::depolarizing(p).unwrap();
    qubits.iter().fold(op.clone(), |acc, &q| apply_kraus_dense(&acc, n, q, ch.operators()))
}

fn hs_norm_sqr(op: &Op) -> f64 {
    op.iter().map(|e| e.norm_sqr()).sum()
}

fn random_bits<R: Rng>(rng: &mut R, l: usize) -> Vec<u8> {
    (0..l).map(|_| rng.random_range(0..=1)).collect()
}

#[test]
fn echo_average_equals_operator_norm_ratio() {
    let (l, t, p) = (5, 3, 0.01);
    let all: Vec<usize> = (0..l).collect();
    for seed in 0..3 {
        let inst = sample_disorder(l, 0.85, seed).unwrap();
        let u = dense_cycle(&inst).unwrap();
        // One period E_{p/2} ∘ U ∘ E_{p/2}, applied to an operator.
        let phi = |op: &Op| {
            let a = depolarize_op(op, l, &all, p / 2.0);
            let b = &u * a * u.adjoint();
            depolarize_op(&b, l, &all, p / 2.0)
        };
        let noise = NoiseModel::symmetric(p).unwrap();
        for q in [0, 2, 4] {
            let z = pauli_string(l, &[(q, Pauli::Z)]);
            let mut evolved = z.clone();
            for _ in 0..t {
                evolved = phi(&evolved);
            }
            let ratio = hs_norm_sqr(&evolved) / hs_norm_sqr(&z);
            let avg = echo_bitstring_average(&inst, q, t, Some(&noise)).unwrap();
            assert!((avg - ratio).abs() < 1e-8, "q {q}: {avg} vs {ratio}");
            assert!(ratio < 1.0);
        }
    }
}

#[test]
fn noiseless_echo_is_identically_one() {
    let mut rng = rng_from_seed(4);
    for seed in 0..10 {
        let l = rng.random_range(2..=10);
        let inst = sample_disorder(l, rng.random_range(0.5..1.0), seed).unwrap();
        let bits = random_bits(&mut rng, l);
        for t in [0, 1, 7, 30] {
            for r in run_echo_all(&inst, &bits, t, None).unwrap() {
                assert!((r.squared - 1.0).abs() < 1e-10 && !r.flagged);
            }
        }
    }
}

#[test]
fn single_qubit_echo_closed_form() {
    let inst = DisorderInstance::custom(0.0, vec![], vec![0.0]).unwrap();
    let p = 0.005;
    let r = run_echo_normalization(&inst, &[0], 0, 1, Some(&NoiseModel::symmetric(p).unwrap())).unwrap();
    assert!((r.a0.unwrap() - (1.0 - 2.0 * p / 3.0f64).powi(2)).abs() < 1e-14);
}

#[test]
fn bitstring_average_equals_infinite_temperature_correlator() {
    for (l, seed) in [(3, 1), (4, 2), (5, 3)] {
        let inst = sample_disorder(l, 0.76, seed).unwrap();
        let u = dense_cycle(&inst).unwrap();
        let t_max = 6;
        let mut sums = vec![vec![0.0; t_max + 1]; l];
        for k in 0..1usize << l {
            for s in run_autocorrelator(&inst, &index_to_bits(k, l), t_max).unwrap() {
                for (t, v) in s.values.iter().enumerate() {
                    sums[s.qubit][t] += v;
                }
            }
        }
        for q in 0..l {
            let z = pauli_string(l, &[(q, Pauli::Z)]);
            let mut zt = z.clone();
            for t in 0..=t_max {
                let oracle = (&zt * &z).trace().re / (1 << l) as f64;
                assert!((sums[q][t] / (1 << l) as f64 - oracle).abs() < 1e-8);
                zt = u.adjoint() * zt * &u;
            }
        }
    }
}

#[test]
fn autocorrelator_analytic_limits() {
    let inst = DisorderInstance::custom(0.6, vec![], vec![0.0]).unwrap();
    let a = &run_autocorrelator(&inst, &[0], 40).unwrap()[0];
    for (t, v) in a.values.iter().enumerate() {
        assert!((v - (0.6 * PI * t as f64).cos()).abs() < 1e-12);
    }
    let inst = sample_disorder(7, 1.0, 3).unwrap();
    for s in run_autocorrelator(&inst, &[1, 0, 0, 1, 0, 1, 1], 20).unwrap() {
        for (t, v) in s.values.iter().enumerate() {
            assert!((v - if t % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-13);
        }
    }
}

#[test]
fn ancilla_readout_equals_direct_overlap() {
    let inst = sample_disorder(8, 0.9, 5).unwrap();
    let scr = build_scrambler(8, 20, 6).unwrap();
    for (qubit, bits) in [(3, vec![0, 1, 1, 0, 1, 0, 0, 1]), (0, vec![1; 8]), (7, vec![0; 8])] {
        let a = run_typicality(&inst, &scr, &bits, qubit, 30).unwrap();
        let b = typicality_overlap(&inst, &scr, &bits, qubit, 30).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}

/// Heisenberg-picture adjoint of one after-gate noisy period.
fn noisy_period_adjoint(inst: &DisorderInstance, p: f64, op: &Op) -> Op {
    let l = inst.l;
    let x = product_operator(l, &(0..l).map(|q| (q, rx(PI * inst.g))).collect::<Vec<_>>());
    let fields = product_operator(l, &(0..l).map(|q| (q, rz(inst.h[q]))).collect::<Vec<_>>());
    let sub = |bonds: &[usize]| {
        bonds.iter().fold(Op::identity(1 << l, 1 << l), |acc, &b| common::embed_2q(l, b, b + 1, &zz(inst.phi[b])) * acc)
    };
    let [a, b] = bond_sublayers(l);
    let qubits = |bonds: &[usize]| bonds.iter().flat_map(|&b| [b, b + 1]).collect::<Vec<_>>();
    let (d1, d2) = (sub(&a), sub(&b));
    // Φ(ρ) = Z_h E_B(D₂ E_A(D₁ X ρ X† D₁†) D₂†) Z_h†; the depolarizing maps
    // are self-adjoint.
    let o = fields.adjoint() * op * &fields;
    let o = depolarize_op(&o, l, &qubits(&b), p);
    let o = d2.adjoint() * o * &d2;
    let o = depolarize_op(&o, l, &qubits(&a), p);
    let o = d1.adjoint() * o * &d1;
    x.adjoint() * o * x
}

#[test]
fn noisy_ancilla_readout_is_symmetrized_correlator() {
    let (l, t, p) = (4, 5, 0.02);
    for seed in 0..3 {
        let inst = sample_disorder(l, 0.8, seed).unwrap();
        let (bits, scr) = scrambled_sample(l, 6, seed, 0).unwrap();
        let psi = scr.prepare(&bits).unwrap();
        let rho = density_from_state(&psi).unwrap().to_dmatrix();
        let noise = NoiseModel::after_gates(p).unwrap();
        for qubit in 0..l {
            let z = pauli_string(l, &[(qubit, Pauli::Z)]);
            let mut zt = z.clone();
            for _ in 0..t {
                zt = noisy_period_adjoint(&inst, p, &zt);
            }
            let oracle = 0.5 * ((&zt * &z + &z * &zt) * &rho).trace().re;
            let got = run_typicality_noisy(&inst, &scr, &bits, qubit, t, &noise).unwrap();
            assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
        }
    }
}

#[test]
fn noisy_readout_reduces_to_pure_one_without_noise() {
    let inst = sample_disorder(5, 0.9, 8).unwrap();
    let (bits, scr) = scrambled_sample(5, 4, 1, 3).unwrap();
    let zero = NoiseModel::after_gates(0.0).unwrap();
    let a = run_typicality_noisy(&inst, &scr, &bits, 2, 9, &zero).unwrap();
    let b = run_typicality(&inst, &scr, &bits, 2, 9).unwrap();
    assert!((a - b).abs() < 1e-12);
    let big = sample_disorder(11, 0.9, 8).unwrap();
    let scr = build_scrambler(11, 1, 1).unwrap();
    assert!(run_typicality_noisy(&big, &scr, &[0; 11], 0, 1, &zero).is_err());
}

#[test]
fn identity_scrambler_spread_is_bare_bitstring_spread() {
    let inst = sample_disorder(6, 0.9, 2).unwrap();
    let spread = typicality_spread(&inst, 0, 12, 2, 20, 99, ExecMode::best()).unwrap();
    let bare: Vec<f64> = (0..20)
        .map(|j| {
            let (bits, _) = scrambled_sample(6, 0, 99, j).unwrap();
            run_autocorrelator(&inst, &bits, 12).unwrap()[2].values[12]
        })
        .collect();
    for (a, b) in spread.values.iter().zip(&bare) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn zeta_profile_at_start_and_without_flip() {
    let inst = sample_disorder(9, 0.94, 1).unwrap();
    let bits = vec![0, 1, 1, 0, 1, 0, 0, 0, 1];
    let f = run_perturbation(&inst, &bits, 4, 20).unwrap();
    for q in 0..9 {
        assert_eq!(f.zeta[q][0], if q == 4 { 1.0 } else { 0.0 });
        assert!(f.zeta[q].iter().all(|z| (0.0..=1.0).contains(z)));
    }
    assert_eq!(f.windows.len(), 2);
    assert!(run_perturbation(&inst, &bits, 9, 20).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn zeta_ratio_bounded_and_scale_invariant(z1 in -1.0f64..1.0, z2 in -1.0f64..1.0, scale in 1e-3f64..1.0) {
        let r = zeta_ratio(z1, z2);
        prop_assert!((0.0..=1.0).contains(&r));
        if z1.abs() + z2.abs() > 1e-9 {
            prop_assert!((zeta_ratio(scale * z1, scale * z2) - r).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_is_nonnegative_and_bounded(seed in any::<u64>(), l in 4usize..=8, t in 0usize..=12) {
        let mut rng = rng_from_seed(seed);
        let inst = sample_disorder(l, rng.random_range(0.5..=1.0), seed).unwrap();
        let bits = random_bits(&mut rng, l);
        let r = spin_glass_chi(&inst, &bits, (t, t), None, false).unwrap();
        prop_assert!(r.chi >= 0.0 && r.chi <= (l - 3) as f64 + 1e-12);
    }
}

#[test]
fn chi_definitional_values() {
    for l in [4, 6, 9] {
        let inst = sample_disorder(l, 0.8, 1).unwrap();
        let bits = vec![1; l];
        let r = spin_glass_chi(&inst, &bits, (0, 0), None, true).unwrap();
        assert!((r.chi - (l - 3) as f64).abs() < 1e-12);
    }
    let mixed = DensityMatrix::maximally_mixed(6).unwrap();
    assert!(chi_from_probs(&mixed.probabilities(), 6).abs() < 1e-15);
    let inst = sample_disorder(3, 0.8, 1).unwrap();
    assert!(spin_glass_chi(&inst, &[0, 0, 0], (0, 0), None, true).is_err());
}

#[test]
fn noisy_chi_matches_pure_engine_at_zero_noise() {
    let inst = sample_disorder(6, 0.9, 3).unwrap();
    let bits = vec![0, 1, 0, 0, 1, 1];
    let zero = NoiseModel::after_gates(0.0).unwrap();
    let a = spin_glass_chi(&inst, &bits, (10, 16), Some(&zero), true).unwrap();
    let b = spin_glass_chi(&inst, &bits, (10, 16), None, true).unwrap();
    assert!((a.chi - b.chi).abs() < 1e-10);
    let noisy = spin_glass_chi(&inst, &bits, (10, 16), Some(&NoiseModel::after_gates(0.01).unwrap()), true).unwrap();
    assert!(noisy.chi < b.chi);
}

fn instance_bits(l: usize, seed: u64) -> Vec<u8> {
    random_bits(&mut rng_from_seed(substream(seed, "bits")), l)
}

#[test]
fn spin_glass_order_grows_into_the_time_crystal() {
    let l = 12;
    let chi_at = |g: f64| {
        let vals = exec::map_range(ExecMode::best(), 300, |i| {
            let seed = derive_seed(1234, i as u64);
            let inst = sample_disorder(l, g, seed).unwrap();
            spin_glass_chi(&inst, &instance_bits(l, seed), (50, 60), None, true).unwrap().chi
        });
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let (deep, thermal) = (chi_at(0.94), chi_at(0.78));
    assert!(deep > 3.0 * thermal, "χ(0.94) = {deep}, χ(0.78) = {thermal}");
}

#[test]
fn disorder_confines_a_local_bit_flip() {
    let (l, flip, instances) = (20, 10, 64);
    let far_mean = |uniform: bool| {
        let vals = exec::map_range(ExecMode::best(), instances, |i| {
            let seed = derive_seed(77, i as u64);
            let inst = if uniform { uniform_instance(l, 0.94, -0.4, seed) } else { sample_disorder(l, 0.94, seed) }.unwrap();
            let f = run_perturbation(&inst, &instance_bits(l, seed), flip, 60).unwrap();
            let w = f.window_mean(51, 60).unwrap();
            let far: Vec<f64> = (0..l).filter(|q| q.abs_diff(flip) >= 3).map(|q| w[q]).collect();
            far.iter().sum::<f64>() / far.len() as f64
        });
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let (mbl, uni) = (far_mean(false), far_mean(true));
    assert!(mbl * 2.0 <= uni, "disordered {mbl}, uniform {uni}");
}

#[test]
fn site_average_can_drop_edges() {
    let inst = sample_disorder(5, 1.0, 2).unwrap();
    let series = run_autocorrelator(&inst, &[0, 1, 0, 1, 1], 3).unwrap();
    assert_eq!(site_average(&series, true), vec![1.0, -1.0, 1.0, -1.0]);
    let mut s = make_bitstring_state(&[0, 0]).unwrap();
    assert!(apply_cycle(&mut s, &inst).is_err());
}
