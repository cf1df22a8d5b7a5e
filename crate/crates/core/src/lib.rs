//! Simulation core for the disordered kicked-Ising Floquet drive.
//!
//! * [`state`], [`density`], [`kernels`]: pure-state and density-matrix
//!   engines. Qubit 0 is the most significant bit of every basis index.
//! * [`floquet`]: disorder instances, the drive period, FSIM gates.
//! * [`protocols`]: autocorrelators, echo, typicality, perturbation spreading
//!   and the spin-glass order parameter.
//! * [`heff`]: effective Hamiltonians and the bitstring gauge map.
//! * [`calibration`]: simulated FSIM calibration sequences and their fits.

pub mod calibration;
pub mod dense;
pub mod density;
pub mod error;
pub mod exec;
pub mod floquet;
pub mod gate;
pub mod heff;
pub mod kernels;
pub mod noise;
pub mod protocols;
pub mod rng;
pub mod state;
pub mod stats;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use density::{density_from_state, DensityMatrix};
pub use error::{Error, Result};
pub use exec::ExecMode;
pub use floquet::{
    apply_cycle, apply_inverse_cycle, fsim_matrix, sample_disorder, uniform_instance, zz_gate_matrix,
    DisorderInstance, FloquetCircuit, FsimParams, NoisyCycle, PreparedCycle,
};
pub use gate::{GateMatrix, KrausChannel, C64};
pub use noise::{NoiseModel, NoisePlacement};
pub use state::{haar_random_state, make_bitstring_state, StateVector};
