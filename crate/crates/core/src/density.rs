//! Mixed-state engine.
//!
//! Entries are stored row-major, `entries[r * 2^n + c] = ρ[r, c]`. Viewed as
//! a `2n`-qubit vector, row qubit `q` sits at bit `n + (n−1−q)` and column
//! qubit `q` at bit `n−1−q`, so every operation reduces to the pure-state
//! kernels: a unitary `U` on qubit `q` acts as `U` on the row bit and
//! `conj(U)` on the column bit, and a channel acts as its superoperator on
//! the `(row, column)` bit pair.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::gate::{check_depolarizing_p, conj2, conj4, kron2, GateMatrix, KrausChannel, Mat2, Mat4, C64, VALIDATION_TOL};
use crate::kernels;
use crate::state::{bit_of, check_size, StateVector};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const MAX_DENSITY_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    num_qubits: usize,
    entries: Vec<C64>,
    #[serde(skip)]
    mode: ExecMode,
}

fn check_dm_size(n: usize) -> Result<()> {
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::Resource(format!(
            "density matrix on {n} qubits exceeds the {MAX_DENSITY_QUBITS}-qubit limit"
        )));
    }
    check_size(n, MAX_DENSITY_QUBITS)
}

/// `|ψ⟩⟨ψ|`.
pub fn density_from_state(state: &StateVector) -> Result<DensityMatrix> {
    let n = state.num_qubits();
    check_dm_size(n)?;
    let a = state.amps();
    let dim = a.len();
    let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
    for (r, row) in entries.chunks_mut(dim).enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            *e = a[r] * a[c].conj();
        }
    }
    Ok(DensityMatrix { num_qubits: n, entries, mode: state.mode() })
}

impl DensityMatrix {
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_dm_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            entries[r * dim + r] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(DensityMatrix { num_qubits, entries, mode: ExecMode::best() })
    }

    /// Wraps a row-major `2^n × 2^n` buffer without validation.
    pub fn from_entries(num_qubits: usize, entries: Vec<C64>) -> Result<Self> {
        check_dm_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        if entries.len() != dim * dim {
            return Err(Error::SizeMismatch { context: "density matrix entries", expected: dim * dim, got: entries.len() });
        }
        Ok(DensityMatrix { num_qubits, entries, mode: ExecMode::best() })
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn set_mode(&mut self, mode: ExecMode) {
        self.mode = mode;
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries[r * self.dim() + c]
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitIndex { index: q, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    #[inline]
    fn row_bit(&self, q: usize) -> usize {
        self.num_qubits + bit_of(self.num_qubits, q)
    }

    #[inline]
    fn col_bit(&self, q: usize) -> usize {
        bit_of(self.num_qubits, q)
    }

    pub fn trace(&self) -> C64 {
        let dim = self.dim();
        (0..dim).map(|r| self.entries[r * dim + r]).sum()
    }

    /// `Tr ρ²` (real for Hermitian ρ).
    pub fn purity(&self) -> f64 {
        kernels::norm_sqr(&self.entries, self.mode)
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.entries[r * dim + c] - self.entries[c * dim + r].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue via dense Hermitian diagonalization. This is
    /// `O(8^n)` and intended for tests.
    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let m = DMatrix::from_row_slice(dim, dim, &self.entries);
        let eig = m.symmetric_eigen();
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        let dim = self.dim();
        DMatrix::from_row_slice(dim, dim, &self.entries)
    }

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

    /// `ρ → U ρ U†` on one qubit, as a single fused pass.
    pub(crate) fn apply_mat2(&mut self, qubit: usize, m: &Mat2) {
        let sup = kron2(m, &conj2(m));
        self.apply_superop(qubit, &sup);
    }

    pub(crate) fn apply_mat4(&mut self, q1: usize, q2: usize, m: &Mat4) {
        let (r1, r2, c1, c2) = (self.row_bit(q1), self.row_bit(q2), self.col_bit(q1), self.col_bit(q2));
        kernels::apply_2q(&mut self.entries, r1, r2, m, self.mode);
        kernels::apply_2q(&mut self.entries, c1, c2, &conj4(m), self.mode);
    }

    /// Applies a 4×4 superoperator on the `(row, column)` bits of `qubit`.
    pub(crate) fn apply_superop(&mut self, qubit: usize, sup: &Mat4) {
        let (r, c) = (self.row_bit(qubit), self.col_bit(qubit));
        kernels::apply_2q(&mut self.entries, r, c, sup, self.mode);
    }

    /// `ρ[r, c] *= d[r >> shift] · conj(d[c >> shift])`.
    pub(crate) fn apply_diagonal(&mut self, diag: &[C64], shift: usize) {
        let dim = self.dim();
        let mode = self.mode;
        let conj: Vec<C64> = (0..dim).map(|c| diag[c >> shift].conj()).collect();
        let work = |(r, row): (usize, &mut [C64])| {
            let dr = diag[r >> shift];
            for (e, dc) in row.iter_mut().zip(conj.iter()) {
                *e *= dr * dc;
            }
        };
        #[cfg(feature = "parallel")]
        if mode.is_parallel() && self.entries.len() >= kernels::PAR_THRESHOLD {
            self.entries.par_chunks_mut(dim).enumerate().for_each(work);
            return;
        }
        let _ = mode;
        self.entries.chunks_mut(dim).enumerate().for_each(work);
    }

    /// `ρ → Σ K ρ K†` on one qubit.
    pub fn apply_channel_1q(&mut self, qubit: usize, ch: &KrausChannel) -> Result<()> {
        self.check_qubit(qubit)?;
        let sup = ch.superoperator();
        self.apply_superop(qubit, &sup);
        Ok(())
    }

    /// Depolarizing channel with Pauli error rate `p`:
    /// `ρ → (1 − 4p/3) ρ + (4p/3) (I/2 ⊗ Tr_q ρ)`.
    pub fn depolarize(&mut self, qubit: usize, p: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        check_depolarizing_p(p)?;
        self.depolarize_unchecked(qubit, p);
        Ok(())
    }

    pub(crate) fn depolarize_unchecked(&mut self, qubit: usize, p: f64) {
        let (r, c) = (self.row_bit(qubit), self.col_bit(qubit));
        kernels::depolarize_pair(&mut self.entries, r, c, 1.0 - 4.0 * p / 3.0, self.mode);
    }

    /// Diagonal of ρ (real part).
    pub fn probabilities(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|r| self.entries[r * dim + r].re).collect()
    }

    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        Ok(crate::state::z_from_probs(&self.probabilities(), self.num_qubits, qubit))
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
            .probabilities()
            .iter()
            .enumerate()
            .map(|(k, p)| if ((k >> bi) ^ (k >> bj)) & 1 == 0 { *p } else { -*p })
            .sum())
    }

    /// `Tr(X_q ρ) = Σ_r ρ[r ⊕ q, r]`.
    pub fn expect_x(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let dim = self.dim();
        let flip = 1usize << bit_of(self.num_qubits, qubit);
        Ok((0..dim).map(|r| self.entries[(r ^ flip) * dim + r].re).sum())
    }
}

/// `Σ K ρ K†` with each Kraus operator embedded as a dense matrix.
pub fn apply_kraus_dense(rho: &DMatrix<C64>, n: usize, qubit: usize, ops: &[Mat2]) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
    for k in ops {
        let full = embed_1q(n, qubit, k);
        out += &full * rho * full.adjoint();
    }
    out
}

/// Dense `2^n × 2^n` matrix of a single-qubit operator on `qubit`.
pub fn embed_1q(n: usize, qubit: usize, m: &Mat2) -> DMatrix<C64> {
    let dim = 1usize << n;
    let b = bit_of(n, qubit);
    DMatrix::from_fn(dim, dim, |r, c| {
        if (r ^ c) & !(1usize << b) != 0 {
            C64::new(0.0, 0.0)
        } else {
            m[(r >> b) & 1][(c >> b) & 1]
        }
    })
}
