use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gate::check_depolarizing_p;

/// Where the depolarizing channels sit within a drive period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePlacement {
    /// `depolarize(p)` on both partner qubits right after every two-qubit
    /// gate sub-layer.
    #[default]
    AfterTwoQubitGates,
    /// `E_{p/2}` on every qubit before and after each period.
    SymmetricPerCycle,
}

/// Depolarizing noise with Pauli error rate `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    pub placement: NoisePlacement,
}

impl NoiseModel {
    pub fn new(p: f64, placement: NoisePlacement) -> Result<Self> {
        check_depolarizing_p(p)?;
        Ok(NoiseModel { p, placement })
    }

    pub fn after_gates(p: f64) -> Result<Self> {
        Self::new(p, NoisePlacement::AfterTwoQubitGates)
    }

    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, NoisePlacement::SymmetricPerCycle)
    }

    pub fn validate(&self) -> Result<()> {
        check_depolarizing_p(self.p)
    }

    pub fn is_noiseless(&self) -> bool {
        self.p == 0.0
    }
}
