//! Measurement protocols run on top of the drive.
//!
//! Every protocol is a pure function of its inputs; ensembles are assembled
//! by the caller.

pub mod autocorr;
pub mod echo;
pub mod perturb;
pub mod spin_glass;
pub mod typicality;

pub use crate::noise::{NoiseModel, NoisePlacement};
pub use autocorr::{run_autocorrelator, z_trajectory, AutocorrSeries};
pub use echo::{echo_bitstring_average, run_echo_all, run_echo_normalization, EchoResult};
pub use perturb::{run_perturbation, zeta_ratio, ZetaField};
pub use spin_glass::{chi_from_probs, spin_glass_chi, SpinGlassResult};
pub use typicality::{
    build_scrambler, run_typicality, run_typicality_noisy, typicality_overlap, typicality_spread,
    ScramblerSpec, SpreadStats,
};

use crate::error::{Error, Result};

pub const MAX_CYCLES: usize = 10_000;

pub(crate) fn check_bits(bits: &[u8], l: usize) -> Result<()> {
    if bits.len() != l {
        return Err(Error::SizeMismatch { context: "bitstring length", expected: l, got: bits.len() });
    }
    if bits.iter().any(|b| *b > 1) {
        return Err(Error::InvalidBit);
    }
    Ok(())
}

pub(crate) fn check_cycles(t: usize) -> Result<()> {
    if t > MAX_CYCLES {
        return Err(Error::OutOfRange { name: "cycles", value: t as f64, min: 0.0, max: MAX_CYCLES as f64 });
    }
    Ok(())
}

/// `+1` for bit 0, `−1` for bit 1.
#[inline]
pub fn z_sign(bit: u8) -> f64 {
    if bit == 0 { 1.0 } else { -1.0 }
}
