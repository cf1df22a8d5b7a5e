//! Pure-state engine.
//!
//! Qubit 0 is the most significant bit of the amplitude index: the bitstring
//! `[1, 0]` is the basis state with index 2.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::gate::{GateMatrix, Mat2, Mat4, C64, VALIDATION_TOL};
use crate::kernels;

pub const MAX_STATE_QUBITS: usize = 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
    #[serde(skip)]
    mode: ExecMode,
}

pub(crate) fn check_size(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::Size { got: n, min: 1, max });
    }
    Ok(())
}

/// Bit position of qubit `q` in an `n`-qubit index.
#[inline]
pub fn bit_of(n: usize, q: usize) -> usize {
    n - 1 - q
}

/// Basis index of a bitstring, first entry most significant.
pub fn bits_to_index(bits: &[u8]) -> Result<usize> {
    let mut idx = 0usize;
    for &b in bits {
        if b > 1 {
            return Err(Error::InvalidBit);
        }
        idx = (idx << 1) | b as usize;
    }
    Ok(idx)
}

pub fn index_to_bits(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((index >> bit_of(n, q)) & 1) as u8).collect()
}

/// Builds the computational basis state `|bits⟩`.
pub fn make_bitstring_state(bits: &[u8]) -> Result<StateVector> {
    check_size(bits.len(), MAX_STATE_QUBITS)?;
    let idx = bits_to_index(bits)?;
    let mut sv = StateVector::zero(bits.len())?;
    sv.amps[0] = C64::new(0.0, 0.0);
    sv.amps[idx] = C64::new(1.0, 0.0);
    Ok(sv)
}

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn haar_random_state<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<StateVector> {
    check_size(num_qubits, MAX_STATE_QUBITS)?;
    let mut amps: Vec<C64> = (0..1usize << num_qubits)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    Ok(StateVector { num_qubits, amps, mode: ExecMode::best() })
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        check_size(num_qubits, MAX_STATE_QUBITS)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1usize << num_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps, mode: ExecMode::best() })
    }

    /// Wraps raw amplitudes; the length must be a power of two. No
    /// normalization is imposed.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::SizeMismatch { context: "amplitude count must be 2^n", expected: len.next_power_of_two().max(2), got: len });
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_size(num_qubits, MAX_STATE_QUBITS)?;
        Ok(StateVector { num_qubits, amps, mode: ExecMode::best() })
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn set_mode(&mut self, mode: ExecMode) {
        self.mode = mode;
    }

    pub fn mode(&self) -> ExecMode {
        self.mode
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        kernels::norm_sqr(&self.amps, self.mode)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_size(other)?;
        Ok(kernels::inner(&self.amps, &other.amps, self.mode))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn check_same_size(&self, other: &StateVector) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::SizeMismatch { context: "qubit count", expected: self.num_qubits, got: other.num_qubits });
        }
        Ok(())
    }

    pub(crate) fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitIndex { index: q, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    /// Applies a validated single-qubit unitary.
    pub fn apply_one_qubit(&mut self, qubit: usize, u: &GateMatrix) -> Result<()> {
        self.check_qubit(qubit)?;
        let m = u.as_one()?;
        let deviation = u.unitarity_deviation();
        if deviation > VALIDATION_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        self.apply_mat2(qubit, m);
        Ok(())
    }

    /// Applies a validated two-qubit unitary; `q1` is the high local bit.
    pub fn apply_two_qubit(&mut self, q1: usize, q2: usize, u: &GateMatrix) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::SameQubit(q1));
        }
        let m = u.as_two()?;
        let deviation = u.unitarity_deviation();
        if deviation > VALIDATION_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        self.apply_mat4(q1, q2, m);
        Ok(())
    }

    /// Unchecked single-qubit application for internal hot loops.
    pub(crate) fn apply_mat2(&mut self, qubit: usize, m: &Mat2) {
        kernels::apply_1q(&mut self.amps, bit_of(self.num_qubits, qubit), m, self.mode);
    }

    pub(crate) fn apply_mat4(&mut self, q1: usize, q2: usize, m: &Mat4) {
        let n = self.num_qubits;
        kernels::apply_2q(&mut self.amps, bit_of(n, q1), bit_of(n, q2), m, self.mode);
    }

    /// Multiplies amplitude `k` by `diag[k >> shift]`.
    pub(crate) fn apply_diagonal(&mut self, diag: &[C64], shift: usize) {
        kernels::apply_diagonal(&mut self.amps, diag, shift, self.mode);
    }

    /// Basis-state probabilities `|amps_k|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        Ok(z_from_probs(&self.probabilities(), self.num_qubits, qubit))
    }

    /// `⟨Z_q⟩` for every qubit in one sweep.
    pub fn expect_z_all(&self) -> Vec<f64> {
        z_all_from_amps(&self.amps, self.num_qubits)
    }

    pub fn expect_zz(&self, i: usize, j: usize) -> Result<f64> {
        self.check_qubit(i)?;
        self.check_qubit(j)?;
        if i == j {
            return Err(Error::SameQubit(i));
        }
        let n = self.num_qubits;
        let (bi, bj) = (bit_of(n, i), bit_of(n, j));
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let parity = ((k >> bi) ^ (k >> bj)) & 1;
                if parity == 0 { a.norm_sqr() } else { -a.norm_sqr() }
            })
            .sum())
    }

    /// `⟨X_q⟩ = 2 Re Σ conj(a_k) a_{k ⊕ q}` over indices with the bit clear.
    pub fn expect_x(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let stride = 1usize << bit_of(self.num_qubits, qubit);
        let mut acc = 0.0;
        for chunk in self.amps.chunks(2 * stride) {
            let (lo, hi) = chunk.split_at(stride);
            acc += lo.iter().zip(hi).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
        }
        Ok(2.0 * acc)
    }

    /// `⟨Y_q⟩ = 2 Im Σ conj(a_k) a_{k ⊕ q}` over indices with the bit clear.
    pub fn expect_y(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let stride = 1usize << bit_of(self.num_qubits, qubit);
        let mut acc = 0.0;
        for chunk in self.amps.chunks(2 * stride) {
            let (lo, hi) = chunk.split_at(stride);
            acc += lo.iter().zip(hi).map(|(a, b)| (a.conj() * b).im).sum::<f64>();
        }
        Ok(2.0 * acc)
    }

    /// Multiplies by `Z_q` in place.
    pub fn apply_z(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let b = bit_of(self.num_qubits, qubit);
        for (k, a) in self.amps.iter_mut().enumerate() {
            if (k >> b) & 1 == 1 {
                *a = -*a;
            }
        }
        Ok(())
    }
}

/// `⟨Z_q⟩` from basis probabilities.
pub fn z_from_probs(probs: &[f64], n: usize, qubit: usize) -> f64 {
    let b = bit_of(n, qubit);
    probs
        .iter()
        .enumerate()
        .map(|(k, p)| if (k >> b) & 1 == 0 { *p } else { -*p })
        .sum()
}

fn z_all_from_amps(amps: &[C64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (k, a) in amps.iter().enumerate() {
        let p = a.norm_sqr();
        for (q, o) in out.iter_mut().enumerate() {
            if (k >> bit_of(n, q)) & 1 == 0 {
                *o += p;
            } else {
                *o -= p;
            }
        }
    }
    out
}

/// `⟨Z_i Z_j⟩` for every ordered pair of qubits, from basis probabilities.
/// Diagonal entries are 1.
pub fn zz_matrix_from_probs(probs: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    let mut signs = vec![0.0f64; n];
    for (k, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (q, s) in signs.iter_mut().enumerate() {
            *s = if (k >> bit_of(n, q)) & 1 == 0 { 1.0 } else { -1.0 };
        }
        for i in 0..n {
            let pi = p * signs[i];
            for j in (i + 1)..n {
                m[i][j] += pi * signs[j];
            }
        }
    }
    for i in 0..n {
        m[i][i] = 1.0;
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{cz, hadamard, pauli_x};
    use crate::rng::rng_from_seed;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn bitstring_indexing() {
        assert_eq!(make_bitstring_state(&[0]).unwrap().amps(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = make_bitstring_state(&[1, 0]).unwrap();
        assert_eq!(s.amps()[2], c(1.0, 0.0));
        assert_eq!(s.probabilities().iter().sum::<f64>(), 1.0);
        let neel: Vec<u8> = (0..20).map(|q| (q % 2) as u8).collect();
        let s = make_bitstring_state(&neel).unwrap();
        assert_eq!(s.amps()[0b0101_0101_0101_0101_0101], c(1.0, 0.0));
        assert!(make_bitstring_state(&[]).is_err());
        assert!(make_bitstring_state(&[0; 23]).is_err());
        assert!(make_bitstring_state(&[2]).is_err());
    }

    #[test]
    fn x_and_pi_pulse() {
        let mut s = make_bitstring_state(&[0]).unwrap();
        s.apply_one_qubit(0, &GateMatrix::One(pauli_x())).unwrap();
        assert_eq!(s.amps(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        let mut s = make_bitstring_state(&[0]).unwrap();
        s.apply_one_qubit(0, &GateMatrix::One(crate::gate::rx(std::f64::consts::PI))).unwrap();
        assert!(s.amps()[0].norm() < 1e-15);
        assert!((s.amps()[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn hadamard_involution() {
        let mut rng = rng_from_seed(1);
        let s0 = haar_random_state(3, &mut rng).unwrap();
        let mut s = s0.clone();
        let h = GateMatrix::One(hadamard());
        s.apply_one_qubit(1, &h).unwrap();
        s.apply_one_qubit(1, &h).unwrap();
        for (a, b) in s.amps().iter().zip(s0.amps()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn two_qubit_examples() {
        let mut s = make_bitstring_state(&[1, 1]).unwrap();
        s.apply_two_qubit(0, 1, &GateMatrix::Two(cz())).unwrap();
        assert_eq!(s.amps()[3], c(-1.0, 0.0));
        let mut s = make_bitstring_state(&[0, 1]).unwrap();
        s.apply_two_qubit(0, 1, &GateMatrix::Two(crate::gate::zz(std::f64::consts::PI))).unwrap();
        assert!((s.amps()[1] - crate::gate::cis(std::f64::consts::FRAC_PI_4)).norm() < 1e-15);
        assert!(matches!(s.apply_two_qubit(1, 1, &GateMatrix::Two(cz())), Err(Error::SameQubit(1))));
        assert!(matches!(s.apply_two_qubit(0, 2, &GateMatrix::Two(cz())), Err(Error::QubitIndex { .. })));
        assert!(s.apply_one_qubit(0, &GateMatrix::Two(cz())).is_err());
    }

    #[test]
    fn expectation_examples() {
        let zero = make_bitstring_state(&[0]).unwrap();
        assert_eq!(zero.expect_z(0).unwrap(), 1.0);
        let plus = StateVector::from_amplitudes(vec![c(0.5f64.sqrt(), 0.0); 2]).unwrap();
        assert!(plus.expect_z(0).unwrap().abs() < 1e-15);
        assert!((plus.expect_x(0).unwrap() - 1.0).abs() < 1e-15);
        let tilted = StateVector::from_amplitudes(vec![c(0.3f64.sqrt(), 0.0), c(0.7f64.sqrt(), 0.0)]).unwrap();
        assert!((tilted.expect_z(0).unwrap() + 0.4).abs() < 1e-15);
        let one = make_bitstring_state(&[1]).unwrap();
        assert_eq!(one.expect_x(0).unwrap(), 0.0);
        let r = 0.5f64.sqrt();
        let ph = StateVector::from_amplitudes(vec![c(r, 0.0), crate::gate::cis(std::f64::consts::FRAC_PI_3) * r]).unwrap();
        assert!((ph.expect_x(0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(make_bitstring_state(&[0, 0]).unwrap().expect_zz(0, 1).unwrap(), 1.0);
        assert_eq!(make_bitstring_state(&[0, 1]).unwrap().expect_zz(0, 1).unwrap(), -1.0);
        let ghz = StateVector::from_amplitudes(vec![c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)]).unwrap();
        assert!((ghz.expect_zz(0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(ghz.expect_zz(1, 1).is_err());
        assert!(ghz.expect_z(2).is_err());
    }

    #[test]
    fn correlator_matrix_matches_pairwise() {
        let mut rng = rng_from_seed(5);
        let s = haar_random_state(5, &mut rng).unwrap();
        let m = zz_matrix_from_probs(&s.probabilities(), 5);
        let z = s.expect_z_all();
        for i in 0..5 {
            assert!((z[i] - s.expect_z(i).unwrap()).abs() < 1e-14);
            for j in 0..5 {
                if i != j {
                    assert!((m[i][j] - s.expect_zz(i, j).unwrap()).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn haar_state_is_deterministic_and_normalized() {
        let a = haar_random_state(6, &mut rng_from_seed(11)).unwrap();
        let b = haar_random_state(6, &mut rng_from_seed(11)).unwrap();
        assert_eq!(a.amps(), b.amps());
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
