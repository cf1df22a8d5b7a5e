mod common;

use common::*;
use dtc_core::dense::spectral_norm;
use dtc_core::density::{apply_kraus_dense, embed_1q};
use dtc_core::gate::{hadamard, kron2, pauli_x, pauli_y, pauli_z, Mat2};
use dtc_core::rng::rng_from_seed;
use dtc_core::state::MAX_STATE_QUBITS;
use dtc_core::{density_from_state, haar_random_state, make_bitstring_state, DensityMatrix, ExecMode, GateMatrix, KrausChannel, StateVector, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

const CASES: u32 = 10_000;

fn amplitude_damping(gamma: f64) -> KrausChannel {
    let z = C64::new(0.0, 0.0);
    let k0: Mat2 = [[C64::new(1.0, 0.0), z], [z, C64::new((1.0 - gamma).sqrt(), 0.0)]];
    let k1: Mat2 = [[z, C64::new(gamma.sqrt(), 0.0)], [z, z]];
    KrausChannel::new(vec![k0, k1]).unwrap()
}

/// A random unitary mixture `Σ w_k U_k ρ U_k†`.
fn random_mixture<R: Rng>(rng: &mut R) -> KrausChannel {
    let w: f64 = rng.random_range(0.0..1.0);
    let scale = |m: Mat2, s: f64| m.map(|row| row.map(|e| e * s));
    KrausChannel::new(vec![scale(random_mat2(rng), w.sqrt()), scale(random_mat2(rng), (1.0 - w).sqrt())]).unwrap()
}

fn random_channel<R: Rng>(rng: &mut R) -> KrausChannel {
    match rng.random_range(0..3) {
        0 => KrausChannel::depolarizing(rng.random_range(0.0..=0.75)).unwrap(),
        1 => amplitude_damping(rng.random_range(0.0..=1.0)),
        _ => random_mixture(rng),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn norm_survives_long_random_gate_sequences(seed in any::<u64>(), n in 2usize..=4, len in 1usize..=10_000) {
        let mut rng = rng_from_seed(seed);
        let mut s = haar_random_state(n, &mut rng).unwrap();
        for _ in 0..len {
            if rng.random::<bool>() {
                let q = rng.random_range(0..n);
                s.apply_one_qubit(q, &gate1(&mut rng)).unwrap();
            } else {
                let (a, b) = qubit_pair(&mut rng, n);
                s.apply_two_qubit(a, b, &gate2(&mut rng)).unwrap();
            }
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn channels_preserve_trace_and_hermiticity(seed in any::<u64>(), n in 1usize..=3, len in 1usize..=40) {
        let mut rng = rng_from_seed(seed);
        let mut dm = density_from_state(&haar_random_state(n, &mut rng).unwrap()).unwrap();
        for _ in 0..len {
            let q = rng.random_range(0..n);
            match rng.random_range(0..3) {
                0 => dm.apply_channel_1q(q, &random_channel(&mut rng)).unwrap(),
                1 => dm.depolarize(q, rng.random_range(0.0..=0.75)).unwrap(),
                _ if n > 1 => {
                    let (a, b) = qubit_pair(&mut rng, n);
                    dm.apply_two_qubit(a, b, &gate2(&mut rng)).unwrap();
                }
                _ => dm.apply_one_qubit(q, &gate1(&mut rng)).unwrap(),
            }
        }
        prop_assert!((dm.trace() - C64::new(1.0, 0.0)).norm() < 1e-9);
        prop_assert!(dm.hermiticity_deviation() < 1e-10);
        prop_assert!(dm.min_eigenvalue() > -1e-8);
    }

    #[test]
    fn state_and_density_engines_agree(seed in any::<u64>(), n in 2usize..=6, len in 1usize..=12) {
        let mut rng = rng_from_seed(seed);
        let mut s = haar_random_state(n, &mut rng).unwrap();
        let mut dm = density_from_state(&s).unwrap();
        for _ in 0..len {
            if rng.random::<bool>() {
                let q = rng.random_range(0..n);
                let u = gate1(&mut rng);
                s.apply_one_qubit(q, &u).unwrap();
                dm.apply_one_qubit(q, &u).unwrap();
            } else {
                let (a, b) = qubit_pair(&mut rng, n);
                let u = gate2(&mut rng);
                s.apply_two_qubit(a, b, &u).unwrap();
                dm.apply_two_qubit(a, b, &u).unwrap();
            }
        }
        for q in 0..n {
            prop_assert!((s.expect_z(q).unwrap() - dm.expect_z(q).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn factorized_two_qubit_gate_equals_two_single_qubit_gates(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let (a, b) = (random_mat2(&mut rng), random_mat2(&mut rng));
        let (q1, q2) = qubit_pair(&mut rng, 4);
        let psi = haar_random_state(4, &mut rng).unwrap();
        let mut joint = psi.clone();
        joint.apply_two_qubit(q1, q2, &GateMatrix::two(kron2(&a, &b)).unwrap()).unwrap();
        let mut split = psi;
        split.apply_one_qubit(q1, &GateMatrix::one(a).unwrap()).unwrap();
        split.apply_one_qubit(q2, &GateMatrix::one(b).unwrap()).unwrap();
        prop_assert!(max_abs_diff(joint.amps(), split.amps()) < 1e-12);
    }

    #[test]
    fn two_qubit_kernel_matches_dense_embedding(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = rng_from_seed(seed);
        let m = random_mat4(&mut rng);
        let (q1, q2) = qubit_pair(&mut rng, n);
        let psi = haar_random_state(n, &mut rng).unwrap();
        let expected = embed_2q(n, q1, q2, &m) * DMatrix::from_column_slice(1 << n, 1, psi.amps());
        let mut s = psi;
        s.apply_two_qubit(q1, q2, &GateMatrix::two(m).unwrap()).unwrap();
        prop_assert!(max_abs_diff(s.amps(), expected.as_slice()) < 1e-12);
    }

    #[test]
    fn superoperator_path_matches_kraus_sum(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = rng_from_seed(seed);
        let ch = random_channel(&mut rng);
        let q = rng.random_range(0..n);
        let mut dm = density_from_state(&haar_random_state(n, &mut rng).unwrap()).unwrap();
        let expected = apply_kraus_dense(&dm.to_dmatrix(), n, q, ch.operators());
        dm.apply_channel_1q(q, &ch).unwrap();
        prop_assert!(spectral_norm(&(dm.to_dmatrix() - expected)) < 1e-12);
    }
}

proptest! {
    // Above the parallel threshold, so each case is comparatively costly.
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parallel_and_sequential_state_paths_agree(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let n = 15;
        let psi = haar_random_state(n, &mut rng).unwrap();
        let u1 = gate1(&mut rng);
        let u2 = gate2(&mut rng);
        let q = rng.random_range(0..n);
        let (a, b) = qubit_pair(&mut rng, n);
        let run = |mode: ExecMode| {
            let mut s = psi.clone().with_mode(mode);
            s.apply_one_qubit(q, &u1).unwrap();
            s.apply_two_qubit(a, b, &u2).unwrap();
            s
        };
        let (seq, par) = (run(ExecMode::Sequential), run(ExecMode::Parallel));
        prop_assert_eq!(seq.amps(), par.amps());
    }
}

#[test]
fn depolarizing_twice_composes_pauli_transfer_coefficient() {
    let mut rng = rng_from_seed(11);
    let p = 0.07;
    let psi = haar_random_state(2, &mut rng).unwrap();
    let mut dm = density_from_state(&psi).unwrap();
    dm.depolarize(1, p).unwrap();
    dm.depolarize(1, p).unwrap();
    let ops = KrausChannel::depolarizing(p).unwrap();
    let once = apply_kraus_dense(&density_from_state(&psi).unwrap().to_dmatrix(), 2, 1, ops.operators());
    let twice = apply_kraus_dense(&once, 2, 1, ops.operators());
    assert!(spectral_norm(&(dm.to_dmatrix() - &twice)) < 1e-13);
    // Traceless part on the target qubit shrinks by (1 − 4p/3)².
    let c = 1.0 - 4.0 * p / 3.0;
    let fresh = density_from_state(&psi).unwrap();
    for pauli in [pauli_x(), pauli_y(), pauli_z()] {
        let op = embed_1q(2, 1, &pauli);
        let before = (fresh.to_dmatrix() * &op).trace().re;
        let after = (dm.to_dmatrix() * &op).trace().re;
        assert!((after - c * c * before).abs() < 1e-13);
    }
}

#[test]
fn depolarizing_examples() {
    let mut dm = density_from_state(&make_bitstring_state(&[0]).unwrap()).unwrap();
    dm.depolarize(0, 0.005).unwrap();
    assert!((dm.expect_z(0).unwrap() - (1.0 - 4.0 * 0.005 / 3.0)).abs() < 1e-15);
    let mut erased = density_from_state(&make_bitstring_state(&[0]).unwrap()).unwrap();
    erased.depolarize(0, 0.75).unwrap();
    let mixed = DensityMatrix::maximally_mixed(1).unwrap();
    assert!(max_abs_diff(erased.entries(), mixed.entries()) < 1e-15);
    let mut fixed = DensityMatrix::maximally_mixed(1).unwrap();
    fixed.depolarize(0, 0.3).unwrap();
    assert!(max_abs_diff(fixed.entries(), mixed.entries()) < 1e-15);
    assert!(dm.depolarize(0, 0.76).is_err());
    assert!(dm.depolarize(0, -0.01).is_err());
}

#[test]
fn haar_single_qubit_mean_is_zero() {
    let mut rng = rng_from_seed(2024);
    let n = 100_000;
    let zs: Vec<f64> = (0..n).map(|_| haar_random_state(1, &mut rng).unwrap().expect_z(0).unwrap()).collect();
    let mean = zs.iter().sum::<f64>() / n as f64;
    // Var ⟨Z⟩ = 1/3 for a Haar qubit.
    let sigma = (1.0 / 3.0 / n as f64).sqrt();
    assert!(mean.abs() < 5.0 * sigma, "mean {mean}");
}

#[test]
fn haar_variance_matches_unitary_design_value() {
    let mut rng = rng_from_seed(7);
    let samples = 10_000;
    let zs: Vec<f64> = (0..samples).map(|_| haar_random_state(10, &mut rng).unwrap().expect_z(4).unwrap()).collect();
    let mean = zs.iter().sum::<f64>() / samples as f64;
    let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / samples as f64;
    let target = 1.0 / 1025.0;
    assert!((var / target - 1.0).abs() < 0.2, "variance {var} vs {target}");
    assert!(mean.abs() < 5.0 * (target / samples as f64).sqrt());
}

#[test]
fn haar_state_repeats_under_seed() {
    let a = haar_random_state(6, &mut rng_from_seed(5)).unwrap();
    let b = haar_random_state(6, &mut rng_from_seed(5)).unwrap();
    assert_eq!(a.amps(), b.amps());
}

#[test]
fn size_limits() {
    assert!(StateVector::zero(0).is_err());
    assert!(StateVector::zero(MAX_STATE_QUBITS + 1).is_err());
    assert!(make_bitstring_state(&[]).is_err());
    assert!(density_from_state(&StateVector::zero(13).unwrap()).is_err());
    assert!(density_from_state(&StateVector::zero(12).unwrap()).is_ok());
}

#[test]
fn gate_validation_errors() {
    let mut s = StateVector::zero(3).unwrap();
    let h = GateMatrix::one(hadamard()).unwrap();
    assert!(s.apply_one_qubit(3, &h).is_err());
    assert!(s.apply_two_qubit(1, 1, &GateMatrix::two(dtc_core::gate::cz()).unwrap()).is_err());
    assert!(s.apply_two_qubit(0, 1, &h).is_err());
    let skew: Mat2 = [[C64::new(1.0, 0.0), C64::new(0.1, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
    assert!(GateMatrix::one(skew).is_err());
    let z = C64::new(0.0, 0.0);
    let leaky: Mat2 = [[C64::new(0.9, 0.0), z], [z, C64::new(1.0, 0.0)]];
    assert!(KrausChannel::new(vec![leaky]).is_err());
}

#[test]
fn expectation_examples_from_amplitudes() {
    let c = |re: f64, im: f64| C64::new(re, im);
    let s = StateVector::from_amplitudes(vec![c(0.3f64.sqrt(), 0.0), c(0.7f64.sqrt(), 0.0)]).unwrap();
    assert!((s.expect_z(0).unwrap() + 0.4).abs() < 1e-15);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let t = std::f64::consts::FRAC_PI_3;
    let s = StateVector::from_amplitudes(vec![c(r, 0.0), c(r * t.cos(), r * t.sin())]).unwrap();
    assert!((s.expect_x(0).unwrap() - 0.5).abs() < 1e-15);
    let ghz = StateVector::from_amplitudes(vec![c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)]).unwrap();
    assert!((ghz.expect_zz(0, 1).unwrap() - 1.0).abs() < 1e-15);
    assert!(ghz.expect_zz(1, 1).is_err());
}
