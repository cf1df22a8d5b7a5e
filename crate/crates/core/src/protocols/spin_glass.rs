use serde::{Deserialize, Serialize};

use super::{check_bits, check_cycles};
use crate::density::density_from_state;
use crate::error::{Error, Result};
use crate::floquet::{DisorderInstance, NoisyCycle, PreparedCycle};
use crate::noise::NoiseModel;
use crate::state::{make_bitstring_state, zz_matrix_from_probs};
use crate::stats;

/// Window-averaged spin-glass order parameter, for one instance or an
/// instance average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinGlassResult {
    pub l: usize,
    pub g: f64,
    pub t_start: usize,
    pub t_end: usize,
    pub chi: f64,
    /// Jackknife error over instances; 0 for a single instance.
    pub stderr: f64,
    pub instances: usize,
}

impl SpinGlassResult {
    /// Instance average with its jackknife standard error.
    pub fn combine(results: &[SpinGlassResult]) -> Result<SpinGlassResult> {
        let first = results.first().ok_or_else(|| Error::Domain("no results to combine".into()))?;
        let values: Vec<f64> = results.iter().map(|r| r.chi).collect();
        let (chi, stderr) = if values.len() >= 2 { stats::jackknife_mean(&values)? } else { (values[0], 0.0) };
        Ok(SpinGlassResult { chi, stderr, instances: results.iter().map(|r| r.instances).sum(), ..first.clone() })
    }
}

/// `(1/(L−2)) Σ_{i≠j} ⟨Z_i Z_j⟩²` over ordered pairs of interior qubits.
pub fn chi_from_probs(probs: &[f64], l: usize) -> f64 {
    let m = zz_matrix_from_probs(probs, l);
    let mut acc = 0.0;
    for i in 1..l - 1 {
        for j in 1..l - 1 {
            if i != j {
                acc += m[i][j] * m[i][j];
            }
        }
    }
    acc / (l as f64 - 2.0)
}

/// Times in `t_start..=t_end`, keeping only even ones if `even_only`.
pub fn window_times(t_start: usize, t_end: usize, even_only: bool) -> Vec<usize> {
    (t_start..=t_end).filter(|t| !even_only || t % 2 == 0).collect()
}

/// χ^SG for one instance and initial bitstring, averaged over the window.
/// With `noise` the density engine is used.
pub fn spin_glass_chi(
    inst: &DisorderInstance,
    bits: &[u8],
    window: (usize, usize),
    noise: Option<&NoiseModel>,
    even_only: bool,
) -> Result<SpinGlassResult> {
    let l = inst.l;
    if l < 4 {
        return Err(Error::Domain(format!("χ^SG needs at least 4 qubits, got {l}")));
    }
    check_bits(bits, l)?;
    let (t_start, t_end) = window;
    check_cycles(t_end)?;
    let times = window_times(t_start, t_end, even_only);
    if times.is_empty() {
        return Err(Error::Domain("empty time window".into()));
    }
    let mut acc = 0.0;
    let mut next = 0;
    match noise {
        None => {
            let cycle = PreparedCycle::new(inst);
            let mut s = make_bitstring_state(bits)?;
            for t in 0..=t_end {
                if t > 0 {
                    cycle.apply(&mut s)?;
                }
                if next < times.len() && times[next] == t {
                    acc += chi_from_probs(&s.probabilities(), l);
                    next += 1;
                }
            }
        }
        Some(model) => {
            let cycle = NoisyCycle::new(inst, *model)?;
            let mut dm = density_from_state(&make_bitstring_state(bits)?)?;
            for t in 0..=t_end {
                if t > 0 {
                    cycle.apply(&mut dm)?;
                }
                if next < times.len() && times[next] == t {
                    acc += chi_from_probs(&dm.probabilities(), l);
                    next += 1;
                }
            }
        }
    }
    Ok(SpinGlassResult { l, g: inst.g, t_start, t_end, chi: acc / times.len() as f64, stderr: 0.0, instances: 1 })
}
