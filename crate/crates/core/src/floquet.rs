//! The disordered kicked-Ising drive
//!
//! `U_F = exp(−i/2 Σ h_i Z_i) · exp(−i/4 Σ φ_i Z_i Z_{i+1}) · exp(−iπg/2 Σ X_i)`
//!
//! on an open chain. The rightmost factor acts first: every period is an
//! x-rotation layer, then the Ising layer, then the longitudinal fields.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::gate::{cis, pauli_x, rx, rz, zz, GateMatrix, Mat2, Mat4, C64, I, ONE, ZERO};
use crate::noise::{NoiseModel, NoisePlacement};
use crate::rng::{rng_from_seed, substream};
use crate::state::{bit_of, StateVector, MAX_STATE_QUBITS};

pub const PHI_MIN: f64 = -1.5 * PI;
pub const PHI_MAX: f64 = -0.5 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingMode {
    Disordered,
    Uniform { phi_bar: f64 },
    /// Hand-specified couplings.
    Custom,
}

/// One realization of the drive parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderInstance {
    pub l: usize,
    pub g: f64,
    pub phi: Vec<f64>,
    pub h: Vec<f64>,
    pub seed: u64,
    pub mode: CouplingMode,
}

fn check_g(g: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&g) || g.is_nan() {
        return Err(Error::OutOfRange { name: "g", value: g, min: 0.0, max: 1.0 });
    }
    Ok(())
}

fn sample_fields(l: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(substream(seed, "fields"));
    (0..l).map(|_| rng.random_range(-PI..=PI)).collect()
}

/// Draws `φ_i ~ U[−1.5π, −0.5π]` and `h_i ~ U[−π, π]` from independent
/// substreams of `seed`.
pub fn sample_disorder(l: usize, g: f64, seed: u64) -> Result<DisorderInstance> {
    if !(2..=MAX_STATE_QUBITS).contains(&l) {
        return Err(Error::Size { got: l, min: 2, max: MAX_STATE_QUBITS });
    }
    check_g(g)?;
    let mut rng = rng_from_seed(substream(seed, "couplings"));
    let phi = (0..l - 1).map(|_| rng.random_range(PHI_MIN..=PHI_MAX)).collect();
    Ok(DisorderInstance { l, g, phi, h: sample_fields(l, seed), seed, mode: CouplingMode::Disordered })
}

/// All couplings equal to `phi_bar`; the fields are the ones
/// [`sample_disorder`] draws for the same seed.
pub fn uniform_instance(l: usize, g: f64, phi_bar: f64, seed: u64) -> Result<DisorderInstance> {
    if !(2..=MAX_STATE_QUBITS).contains(&l) {
        return Err(Error::Size { got: l, min: 2, max: MAX_STATE_QUBITS });
    }
    check_g(g)?;
    Ok(DisorderInstance {
        l,
        g,
        phi: vec![phi_bar; l - 1],
        h: sample_fields(l, seed),
        seed,
        mode: CouplingMode::Uniform { phi_bar },
    })
}

impl DisorderInstance {
    /// Explicit parameters; allows a single qubit (no couplings).
    pub fn custom(g: f64, phi: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let l = h.len();
        if !(1..=MAX_STATE_QUBITS).contains(&l) {
            return Err(Error::Size { got: l, min: 1, max: MAX_STATE_QUBITS });
        }
        if phi.len() != l - 1 {
            return Err(Error::SizeMismatch { context: "coupling count", expected: l - 1, got: phi.len() });
        }
        check_g(g)?;
        Ok(DisorderInstance { l, g, phi, h, seed: 0, mode: CouplingMode::Custom })
    }

    /// Same couplings and fields at a different `g`.
    pub fn with_g(&self, g: f64) -> Result<Self> {
        check_g(g)?;
        Ok(DisorderInstance { g, ..self.clone() })
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.phi.len() + 1 != self.l || self.h.len() != self.l {
            return Err(Error::SizeMismatch { context: "instance vectors", expected: self.l, got: self.h.len() });
        }
        if self.h.iter().any(|h| !(-PI..=PI).contains(h)) {
            return Err(Error::Domain("field outside [−π, π]".into()));
        }
        match self.mode {
            CouplingMode::Disordered => {
                if self.phi.iter().any(|p| !(PHI_MIN..=PHI_MAX).contains(p)) {
                    return Err(Error::Domain("coupling outside [−1.5π, −0.5π]".into()));
                }
            }
            CouplingMode::Uniform { phi_bar } => {
                if self.phi.iter().any(|p| *p != phi_bar) {
                    return Err(Error::Domain("uniform instance with unequal couplings".into()));
                }
            }
            CouplingMode::Custom => {}
        }
        Ok(())
    }

    pub(crate) fn check_state(&self, n: usize) -> Result<()> {
        if n != self.l {
            return Err(Error::SizeMismatch { context: "state size vs instance length", expected: self.l, got: n });
        }
        Ok(())
    }
}

/// The five-angle two-qubit gate family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct FsimParams {
    pub theta: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub delta_minus_off: f64,
    pub phi: f64,
}

/// FSIM matrix in the basis `|00>, |01>, |10>, |11>`.
pub fn fsim_matrix(p: &FsimParams) -> GateMatrix {
    let (s, c) = p.theta.sin_cos();
    let mut m: Mat4 = [[ZERO; 4]; 4];
    m[0][0] = ONE;
    m[1][1] = cis(p.delta_plus + p.delta_minus) * c;
    m[1][2] = -I * cis(p.delta_plus - p.delta_minus_off) * s;
    m[2][1] = -I * cis(p.delta_plus + p.delta_minus_off) * s;
    m[2][2] = cis(p.delta_plus - p.delta_minus) * c;
    m[3][3] = cis(2.0 * p.delta_plus - p.phi);
    GateMatrix::Two(m)
}

/// `exp(−i (φ/4) Z⊗Z)`.
pub fn zz_gate_matrix(phi: f64) -> GateMatrix {
    GateMatrix::Two(zz(phi))
}

/// One gate of an explicit circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircuitGate {
    One { qubit: usize, m: Mat2 },
    Two { q1: usize, q2: usize, m: Mat4 },
}

/// Bonds `(b, b+1)` of the first Ising sub-layer (`b` even), then of the
/// second (`b` odd). With one-based labels these are the odd bonds followed
/// by the even bonds.
pub fn bond_sublayers(l: usize) -> [Vec<usize>; 2] {
    let bonds = l.saturating_sub(1);
    [(0..bonds).step_by(2).collect(), (1..bonds).step_by(2).collect()]
}

/// The explicit per-period gate list of the drive.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetCircuit {
    pub instance: DisorderInstance,
    pub gates: Vec<CircuitGate>,
}

impl FloquetCircuit {
    /// `L` x-rotations, `L − 1` Ising gates (first sub-layer, then second),
    /// then `L` z-rotations.
    pub fn new(inst: &DisorderInstance) -> Self {
        let l = inst.l;
        let mut gates = Vec::with_capacity(3 * l);
        let x = rx(PI * inst.g);
        gates.extend((0..l).map(|q| CircuitGate::One { qubit: q, m: x }));
        for layer in bond_sublayers(l) {
            gates.extend(layer.into_iter().map(|b| CircuitGate::Two { q1: b, q2: b + 1, m: zz(inst.phi[b]) }));
        }
        gates.extend((0..l).map(|q| CircuitGate::One { qubit: q, m: rz(inst.h[q]) }));
        FloquetCircuit { instance: inst.clone(), gates }
    }

    /// The period used after `P_{π,e}` in the echo: the same Ising gates,
    /// fields flipped on qubits outside `P_{π,e}`, and the x-rotation
    /// reversed and moved to the end, so that `P V P = U_F†`.
    pub fn echo_reversal(inst: &DisorderInstance) -> Self {
        let l = inst.l;
        let mut gates = Vec::with_capacity(3 * l);
        for layer in bond_sublayers(l) {
            gates.extend(layer.into_iter().map(|b| CircuitGate::Two { q1: b, q2: b + 1, m: zz(inst.phi[b]) }));
        }
        for q in 0..l {
            let sign = if q % 2 == 1 { 1.0 } else { -1.0 };
            gates.push(CircuitGate::One { qubit: q, m: rz(sign * inst.h[q]) });
        }
        let x = rx(-PI * inst.g);
        gates.extend((0..l).map(|q| CircuitGate::One { qubit: q, m: x }));
        FloquetCircuit { instance: inst.clone(), gates }
    }

    /// `X` on every even qubit in one-based labels (odd zero-based index).
    pub fn even_flip(l: usize) -> Vec<CircuitGate> {
        (1..l).step_by(2).map(|q| CircuitGate::One { qubit: q, m: pauli_x() }).collect()
    }

    pub fn count_by_arity(&self) -> (usize, usize) {
        let ones = self.gates.iter().filter(|g| matches!(g, CircuitGate::One { .. })).count();
        (ones, self.gates.len() - ones)
    }

    /// Gate-by-gate application (reference path).
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.instance.check_state(state.num_qubits())?;
        apply_gates(state, &self.gates);
        Ok(())
    }

    pub fn dense_unitary(&self) -> Result<DMatrix<C64>> {
        dense_of_gates(self.instance.l, &self.gates)
    }
}

pub fn apply_gates(state: &mut StateVector, gates: &[CircuitGate]) {
    for g in gates {
        match g {
            CircuitGate::One { qubit, m } => state.apply_mat2(*qubit, m),
            CircuitGate::Two { q1, q2, m } => state.apply_mat4(*q1, *q2, m),
        }
    }
}

/// Dense matrix of a gate list, built column by column.
pub fn dense_of_gates(l: usize, gates: &[CircuitGate]) -> Result<DMatrix<C64>> {
    dense_of_map(l, |s| {
        apply_gates(s, gates);
        Ok(())
    })
}

/// Dense matrix of any linear map on `l`-qubit states (`l ≤ 12`).
pub fn dense_of_map<F>(l: usize, mut f: F) -> Result<DMatrix<C64>>
where
    F: FnMut(&mut StateVector) -> Result<()>,
{
    if l > 12 {
        return Err(Error::Resource(format!("dense {l}-qubit matrix")));
    }
    let dim = 1usize << l;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut amps = vec![ZERO; dim];
        amps[col] = ONE;
        let mut s = StateVector::from_amplitudes(amps)?.with_mode(crate::exec::ExecMode::Sequential);
        f(&mut s)?;
        for (r, a) in s.amps().iter().enumerate() {
            out[(r, col)] = *a;
        }
    }
    Ok(out)
}

/// Phases of the Ising and field layers for every basis index; `bonds`
/// selects which couplings to include.
fn diagonal_phases(inst: &DisorderInstance, bonds: &[usize], fields: bool) -> Vec<C64> {
    let l = inst.l;
    let dim = 1usize << l;
    let mut out = Vec::with_capacity(dim);
    for k in 0..dim {
        let z = |q: usize| if (k >> bit_of(l, q)) & 1 == 0 { 1.0 } else { -1.0 };
        let mut angle = 0.0;
        for &b in bonds {
            angle += inst.phi[b] / 4.0 * z(b) * z(b + 1);
        }
        if fields {
            for q in 0..l {
                angle += inst.h[q] / 2.0 * z(q);
            }
        }
        out.push(cis(-angle));
    }
    out
}

/// A drive period compiled to one x-rotation matrix plus a cached diagonal.
///
/// All Ising gates and field rotations commute, so the whole z-part of the
/// period is a single diagonal pass. The system may be the leading `L`
/// qubits of a larger register (`embedded` methods); the trailing qubits are
/// spectators.
#[derive(Debug, Clone)]
pub struct PreparedCycle {
    l: usize,
    x: Mat2,
    diag: Vec<C64>,
}

impl PreparedCycle {
    pub fn new(inst: &DisorderInstance) -> Self {
        let all: Vec<usize> = (0..inst.l.saturating_sub(1)).collect();
        PreparedCycle { l: inst.l, x: rx(PI * inst.g), diag: diagonal_phases(inst, &all, true) }
    }

    pub fn num_qubits(&self) -> usize {
        self.l
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.l {
            return Err(Error::SizeMismatch { context: "state size vs instance length", expected: self.l, got: state.num_qubits() });
        }
        self.apply_embedded(state)
    }

    pub fn apply_inverse(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.l {
            return Err(Error::SizeMismatch { context: "state size vs instance length", expected: self.l, got: state.num_qubits() });
        }
        self.apply_inverse_embedded(state)
    }

    fn spectators(&self, n: usize) -> Result<usize> {
        if n < self.l {
            return Err(Error::SizeMismatch { context: "register smaller than system", expected: self.l, got: n });
        }
        Ok(n - self.l)
    }

    /// One period on the leading `L` qubits of `state`.
    pub fn apply_embedded(&self, state: &mut StateVector) -> Result<()> {
        let shift = self.spectators(state.num_qubits())?;
        for q in 0..self.l {
            state.apply_mat2(q, &self.x);
        }
        state.apply_diagonal(&self.diag, shift);
        Ok(())
    }

    pub fn apply_inverse_embedded(&self, state: &mut StateVector) -> Result<()> {
        let shift = self.spectators(state.num_qubits())?;
        let conj: Vec<C64> = self.diag.iter().map(|d| d.conj()).collect();
        state.apply_diagonal(&conj, shift);
        let xd = crate::gate::adjoint2(&self.x);
        for q in 0..self.l {
            state.apply_mat2(q, &xd);
        }
        Ok(())
    }

    /// Noiseless period on the leading qubits of a density matrix.
    pub fn apply_dm_embedded(&self, dm: &mut DensityMatrix) -> Result<()> {
        let shift = self.spectators(dm.num_qubits())?;
        for q in 0..self.l {
            dm.apply_mat2(q, &self.x);
        }
        dm.apply_diagonal(&self.diag, shift);
        Ok(())
    }
}

/// One drive period.
pub fn apply_cycle(state: &mut StateVector, inst: &DisorderInstance) -> Result<()> {
    inst.check_state(state.num_qubits())?;
    PreparedCycle::new(inst).apply(state)
}

/// The exact adjoint of [`apply_cycle`].
pub fn apply_inverse_cycle(state: &mut StateVector, inst: &DisorderInstance) -> Result<()> {
    inst.check_state(state.num_qubits())?;
    PreparedCycle::new(inst).apply_inverse(state)
}

/// A drive period with depolarizing noise, acting on density matrices.
///
/// With [`NoisePlacement::AfterTwoQubitGates`] a period is: x-rotations,
/// first Ising sub-layer, noise on the qubits it touched, second Ising
/// sub-layer, fields, noise on the qubits of the second sub-layer. Moving the
/// second noise layer past the field rotations is exact because the
/// depolarizing channel commutes with any unitary on its own qubit.
#[derive(Debug, Clone)]
pub struct NoisyCycle {
    l: usize,
    noise: NoiseModel,
    x: Mat2,
    first: Vec<C64>,
    second: Vec<C64>,
    first_qubits: Vec<usize>,
    second_qubits: Vec<usize>,
}

fn sublayer_qubits(bonds: &[usize]) -> Vec<usize> {
    bonds.iter().flat_map(|&b| [b, b + 1]).collect()
}

impl NoisyCycle {
    pub fn new(inst: &DisorderInstance, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        let [a, b] = bond_sublayers(inst.l);
        let (first, second) = match noise.placement {
            NoisePlacement::AfterTwoQubitGates => {
                (diagonal_phases(inst, &a, false), diagonal_phases(inst, &b, true))
            }
            NoisePlacement::SymmetricPerCycle => {
                let all: Vec<usize> = (0..inst.l.saturating_sub(1)).collect();
                (diagonal_phases(inst, &all, true), Vec::new())
            }
        };
        Ok(NoisyCycle {
            l: inst.l,
            noise,
            x: rx(PI * inst.g),
            first,
            second,
            first_qubits: sublayer_qubits(&a),
            second_qubits: sublayer_qubits(&b),
        })
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    fn shift(&self, dm: &DensityMatrix) -> Result<usize> {
        if dm.num_qubits() < self.l {
            return Err(Error::SizeMismatch { context: "register smaller than system", expected: self.l, got: dm.num_qubits() });
        }
        Ok(dm.num_qubits() - self.l)
    }

    fn depolarize_all(&self, dm: &mut DensityMatrix, p: f64) {
        if p > 0.0 {
            for q in 0..self.l {
                dm.depolarize_unchecked(q, p);
            }
        }
    }

    fn depolarize_set(&self, dm: &mut DensityMatrix, qubits: &[usize]) {
        if self.noise.p > 0.0 {
            for &q in qubits {
                dm.depolarize_unchecked(q, self.noise.p);
            }
        }
    }

    /// One noisy period on the leading `L` qubits.
    pub fn apply(&self, dm: &mut DensityMatrix) -> Result<()> {
        let shift = self.shift(dm)?;
        match self.noise.placement {
            NoisePlacement::AfterTwoQubitGates => {
                for q in 0..self.l {
                    dm.apply_mat2(q, &self.x);
                }
                dm.apply_diagonal(&self.first, shift);
                self.depolarize_set(dm, &self.first_qubits);
                dm.apply_diagonal(&self.second, shift);
                self.depolarize_set(dm, &self.second_qubits);
            }
            NoisePlacement::SymmetricPerCycle => {
                let half = self.noise.p / 2.0;
                self.depolarize_all(dm, half);
                for q in 0..self.l {
                    dm.apply_mat2(q, &self.x);
                }
                dm.apply_diagonal(&self.first, shift);
                self.depolarize_all(dm, half);
            }
        }
        Ok(())
    }

    /// The backward period of the echo: the adjoint gate sequence with the
    /// same noise attached to the two-qubit gates. For symmetric placement
    /// this is exactly the Hilbert–Schmidt adjoint of [`NoisyCycle::apply`].
    pub fn apply_inverse(&self, dm: &mut DensityMatrix) -> Result<()> {
        let shift = self.shift(dm)?;
        let xd = crate::gate::adjoint2(&self.x);
        let conj = |d: &[C64]| d.iter().map(|v| v.conj()).collect::<Vec<_>>();
        match self.noise.placement {
            NoisePlacement::AfterTwoQubitGates => {
                dm.apply_diagonal(&conj(&self.second), shift);
                self.depolarize_set(dm, &self.second_qubits);
                dm.apply_diagonal(&conj(&self.first), shift);
                self.depolarize_set(dm, &self.first_qubits);
                for q in 0..self.l {
                    dm.apply_mat2(q, &xd);
                }
            }
            NoisePlacement::SymmetricPerCycle => {
                let half = self.noise.p / 2.0;
                self.depolarize_all(dm, half);
                dm.apply_diagonal(&conj(&self.first), shift);
                for q in 0..self.l {
                    dm.apply_mat2(q, &xd);
                }
                self.depolarize_all(dm, half);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::make_bitstring_state;

    #[test]
    fn sampled_ranges_and_determinism() {
        let a = sample_disorder(12, 0.9, 5).unwrap();
        assert!(a.phi.iter().all(|p| (PHI_MIN..=PHI_MAX).contains(p)));
        assert!(a.h.iter().all(|h| (-PI..=PI).contains(h)));
        assert_eq!(a, sample_disorder(12, 0.9, 5).unwrap());
        a.check_invariants().unwrap();
        assert!(sample_disorder(1, 0.9, 5).is_err());
        assert!(sample_disorder(4, 1.2, 5).is_err());
    }

    #[test]
    fn uniform_instance_shares_fields() {
        let d = sample_disorder(10, 0.94, 77).unwrap();
        let u = uniform_instance(10, 0.94, -0.4, 77).unwrap();
        assert_eq!(d.h, u.h);
        assert!(u.phi.iter().all(|p| *p == -0.4));
        u.check_invariants().unwrap();
        let z = uniform_instance(10, 0.94, 0.0, 77).unwrap();
        assert!(z.phi.iter().all(|p| *p == 0.0));
    }

    #[test]
    fn circuit_gate_counts() {
        for l in [2, 5, 8] {
            let c = FloquetCircuit::new(&sample_disorder(l, 0.8, 1).unwrap());
            assert_eq!(c.count_by_arity(), (2 * l, l - 1));
        }
    }

    #[test]
    fn single_qubit_rotation_law() {
        let g = 0.37;
        let inst = DisorderInstance::custom(g, vec![], vec![0.0]).unwrap();
        let cyc = PreparedCycle::new(&inst);
        let mut s = make_bitstring_state(&[0]).unwrap();
        for t in 1..=20 {
            cyc.apply(&mut s).unwrap();
            assert!((s.expect_z(0).unwrap() - (PI * g * t as f64).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn size_mismatch_reported() {
        let inst = sample_disorder(4, 0.8, 1).unwrap();
        let mut s = make_bitstring_state(&[0, 1, 0]).unwrap();
        assert!(matches!(apply_cycle(&mut s, &inst), Err(Error::SizeMismatch { .. })));
        assert!(apply_inverse_cycle(&mut s, &inst).is_err());
    }
}
