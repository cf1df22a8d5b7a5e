use serde::{Deserialize, Serialize};

use super::{check_bits, check_cycles, z_sign};
use crate::density::density_from_state;
use crate::error::{Error, Result};
use crate::floquet::{DisorderInstance, NoisyCycle, PreparedCycle};
use crate::noise::NoiseModel;
use crate::state::{index_to_bits, make_bitstring_state};

/// Outcome of the echo sequence `(U_F†)^t U_F^t` on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoResult {
    /// `z_i(0) ⟨Z_i⟩` after the echo, i.e. `A₀²`.
    pub squared: f64,
    /// `√squared`, absent when the radicand is negative.
    pub a0: Option<f64>,
    pub flagged: bool,
}

impl EchoResult {
    fn from_squared(squared: f64) -> Self {
        if squared >= 0.0 {
            EchoResult { squared, a0: Some(squared.sqrt()), flagged: false }
        } else {
            EchoResult { squared, a0: None, flagged: true }
        }
    }
}

/// Echo outcome for every qubit of one bitstring. Without noise the pure
/// engine runs forward and backward; with noise the density engine runs
/// `t` noisy periods and `t` noisy backward periods.
pub fn run_echo_all(inst: &DisorderInstance, bits: &[u8], t: usize, noise: Option<&NoiseModel>) -> Result<Vec<EchoResult>> {
    check_bits(bits, inst.l)?;
    check_cycles(t)?;
    let z = match noise {
        None => {
            let cycle = PreparedCycle::new(inst);
            let mut s = make_bitstring_state(bits)?;
            for _ in 0..t {
                cycle.apply(&mut s)?;
            }
            for _ in 0..t {
                cycle.apply_inverse(&mut s)?;
            }
            s.expect_z_all()
        }
        Some(model) => {
            let cycle = NoisyCycle::new(inst, *model)?;
            let mut dm = density_from_state(&make_bitstring_state(bits)?)?;
            for _ in 0..t {
                cycle.apply(&mut dm)?;
            }
            for _ in 0..t {
                cycle.apply_inverse(&mut dm)?;
            }
            (0..inst.l).map(|q| dm.expect_z(q)).collect::<Result<Vec<_>>>()?
        }
    };
    Ok(z.iter().zip(bits).map(|(zq, b)| EchoResult::from_squared(z_sign(*b) * zq)).collect())
}

/// Echo outcome on one qubit.
pub fn run_echo_normalization(
    inst: &DisorderInstance,
    bits: &[u8],
    qubit: usize,
    t: usize,
    noise: Option<&NoiseModel>,
) -> Result<EchoResult> {
    if qubit >= inst.l {
        return Err(Error::QubitIndex { index: qubit, num_qubits: inst.l });
    }
    Ok(run_echo_all(inst, bits, t, noise)?[qubit])
}

/// `2^{−L} Σ_s z_i(0) ⟨Z_i⟩^echo_s`: the echo signal `A₀²` averaged over
/// every bitstring.
pub fn echo_bitstring_average(inst: &DisorderInstance, qubit: usize, t: usize, noise: Option<&NoiseModel>) -> Result<f64> {
    if inst.l > 12 {
        return Err(Error::Resource("exhaustive bitstring average limited to 12 qubits".into()));
    }
    let dim = 1usize << inst.l;
    let mut acc = 0.0;
    for idx in 0..dim {
        acc += run_echo_normalization(inst, &index_to_bits(idx, inst.l), qubit, t, noise)?.squared;
    }
    Ok(acc / dim as f64)
}
