//! Spectral averages from scrambled bitstrings, read out through an ancilla.
//!
//! The ancilla is appended as the last (least significant) qubit, after the
//! `L` system qubits.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{check_bits, check_cycles};
use crate::density::density_from_state;
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::floquet::{DisorderInstance, NoisyCycle, PreparedCycle};
use crate::gate::{cz, hadamard, r_equatorial, Mat2};
use crate::noise::NoiseModel;
use crate::rng::{derive_seed, rng_from_seed, substream};
use crate::state::{make_bitstring_state, StateVector, MAX_STATE_QUBITS};
use crate::stats;

pub const ANGLE_MIN: f64 = 0.4 * PI;
pub const ANGLE_MAX: f64 = 0.6 * PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScramblerLayer {
    /// CZ acts on bonds `(b, b+1)` with `b % 2 == parity`.
    pub parity: usize,
    /// Equatorial rotation axis angle per qubit, in `[0, 2π)`.
    pub axes: Vec<f64>,
    /// Rotation angle per qubit, in `[0.4π, 0.6π]`.
    pub angles: Vec<f64>,
}

/// A depth-`K` brickwork of random equatorial rotations and CZ layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScramblerSpec {
    pub l: usize,
    pub k: usize,
    pub seed: u64,
    pub layers: Vec<ScramblerLayer>,
}

pub fn build_scrambler(l: usize, k: usize, seed: u64) -> Result<ScramblerSpec> {
    if l == 0 || l > MAX_STATE_QUBITS {
        return Err(Error::Size { got: l, min: 1, max: MAX_STATE_QUBITS });
    }
    let mut rng = rng_from_seed(substream(seed, "scrambler"));
    let layers = (0..k)
        .map(|layer| {
            let mut axes = Vec::with_capacity(l);
            let mut angles = Vec::with_capacity(l);
            for _ in 0..l {
                axes.push(rng.random_range(0.0..2.0 * PI));
                angles.push(rng.random_range(ANGLE_MIN..=ANGLE_MAX));
            }
            ScramblerLayer { parity: layer % 2, axes, angles }
        })
        .collect();
    Ok(ScramblerSpec { l, k, seed, layers })
}

impl ScramblerSpec {
    /// Applies the circuit to the leading `L` qubits of `state`: per layer,
    /// rotations on every qubit, then the CZ layer.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() < self.l {
            return Err(Error::SizeMismatch { context: "register smaller than scrambler", expected: self.l, got: state.num_qubits() });
        }
        let czm = cz();
        for layer in &self.layers {
            for q in 0..self.l {
                let r: Mat2 = r_equatorial(layer.angles[q], layer.axes[q]);
                state.apply_mat2(q, &r);
            }
            for b in (layer.parity..self.l.saturating_sub(1)).step_by(2) {
                state.apply_mat4(b, b + 1, &czm);
            }
        }
        Ok(())
    }

    pub fn prepare(&self, bits: &[u8]) -> Result<StateVector> {
        check_bits(bits, self.l)?;
        let mut s = make_bitstring_state(bits)?;
        self.apply(&mut s)?;
        Ok(s)
    }
}

fn check_typicality_inputs(inst: &DisorderInstance, scr: &ScramblerSpec, bits: &[u8], qubit: usize, t: usize) -> Result<()> {
    check_bits(bits, inst.l)?;
    check_cycles(t)?;
    if scr.l != inst.l {
        return Err(Error::SizeMismatch { context: "scrambler width", expected: inst.l, got: scr.l });
    }
    if qubit >= inst.l {
        return Err(Error::QubitIndex { index: qubit, num_qubits: inst.l });
    }
    if inst.l + 1 > MAX_STATE_QUBITS {
        return Err(Error::Size { got: inst.l + 1, min: 1, max: MAX_STATE_QUBITS });
    }
    Ok(())
}

/// Ancilla in `|+⟩`, system scrambled, `CZ(qubit, ancilla)`, `t` periods,
/// `CZ(qubit, ancilla)`; returns `⟨X⟩` of the ancilla.
pub fn run_typicality(inst: &DisorderInstance, scr: &ScramblerSpec, bits: &[u8], qubit: usize, t: usize) -> Result<f64> {
    check_typicality_inputs(inst, scr, bits, qubit, t)?;
    let l = inst.l;
    let mut reg = bits.to_vec();
    reg.push(0);
    let mut s = make_bitstring_state(&reg)?;
    s.apply_mat2(l, &hadamard());
    scr.apply(&mut s)?;
    let czm = cz();
    s.apply_mat4(qubit, l, &czm);
    let cycle = PreparedCycle::new(inst);
    for _ in 0..t {
        cycle.apply_embedded(&mut s)?;
    }
    s.apply_mat4(qubit, l, &czm);
    s.expect_x(l)
}

/// `Re⟨ψ| U^{−t} Z_i U^t Z_i |ψ⟩` with `|ψ⟩ = U_S|bits⟩`, computed from the
/// two evolved states directly.
pub fn typicality_overlap(inst: &DisorderInstance, scr: &ScramblerSpec, bits: &[u8], qubit: usize, t: usize) -> Result<f64> {
    check_typicality_inputs(inst, scr, bits, qubit, t)?;
    let psi = scr.prepare(bits)?;
    let mut zpsi = psi.clone();
    zpsi.apply_z(qubit)?;
    let mut plain = psi;
    let cycle = PreparedCycle::new(inst);
    for _ in 0..t {
        cycle.apply(&mut plain)?;
        cycle.apply(&mut zpsi)?;
    }
    plain.apply_z(qubit)?;
    Ok(plain.inner(&zpsi)?.re)
}

/// Density-matrix version of [`run_typicality`] with noisy periods; the
/// scrambler and ancilla gates are noiseless. Limited to `L ≤ 10`.
pub fn run_typicality_noisy(
    inst: &DisorderInstance,
    scr: &ScramblerSpec,
    bits: &[u8],
    qubit: usize,
    t: usize,
    noise: &NoiseModel,
) -> Result<f64> {
    check_typicality_inputs(inst, scr, bits, qubit, t)?;
    if inst.l > 10 {
        return Err(Error::Resource("noisy typicality limited to 10 system qubits".into()));
    }
    let l = inst.l;
    let mut reg = bits.to_vec();
    reg.push(0);
    let mut s = make_bitstring_state(&reg)?;
    s.apply_mat2(l, &hadamard());
    scr.apply(&mut s)?;
    let czm = cz();
    s.apply_mat4(qubit, l, &czm);
    let mut dm = density_from_state(&s)?;
    let cycle = NoisyCycle::new(inst, *noise)?;
    for _ in 0..t {
        cycle.apply(&mut dm)?;
    }
    dm.apply_mat4(qubit, l, &czm);
    dm.expect_x(l)
}

/// Spread of the typicality signal over scrambled random bitstrings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadStats {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub ratio: f64,
    /// False when the mean is too close to zero for `σ/μ` to mean anything.
    pub reliable: bool,
    pub values: Vec<f64>,
}

impl SpreadStats {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain("spread needs at least two samples".into()));
        }
        let mean = stats::mean(&values);
        let std = stats::population_std(&values);
        let reliable = mean.abs() > 1e-9;
        let ratio = if reliable { std / mean.abs() } else { f64::INFINITY };
        Ok(SpreadStats { n: values.len(), mean, std, ratio, reliable, values })
    }
}

/// Random bitstring `j` and its scrambler, both derived from `(seed, j)`.
pub fn scrambled_sample(l: usize, k: usize, seed: u64, j: usize) -> Result<(Vec<u8>, ScramblerSpec)> {
    let s = derive_seed(seed, j as u64);
    let mut rng = rng_from_seed(substream(s, "bits"));
    let bits = (0..l).map(|_| rng.random_range(0..=1u8)).collect();
    Ok((bits, build_scrambler(l, k, s)?))
}

/// Runs [`run_typicality`] on `n_bitstrings` random bitstrings, each with a
/// fresh depth-`k` scrambler.
pub fn typicality_spread(
    inst: &DisorderInstance,
    k: usize,
    t: usize,
    qubit: usize,
    n_bitstrings: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<SpreadStats> {
    if n_bitstrings < 2 {
        return Err(Error::Domain("need at least two bitstrings".into()));
    }
    let values = exec::map_range(mode, n_bitstrings, |j| {
        let (bits, scr) = scrambled_sample(inst.l, k, seed, j)?;
        run_typicality(inst, &scr, &bits, qubit, t)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    SpreadStats::from_values(values)
}
