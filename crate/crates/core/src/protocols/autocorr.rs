use serde::{Deserialize, Serialize};

use super::{check_bits, check_cycles, z_sign};
use crate::error::Result;
use crate::floquet::{DisorderInstance, PreparedCycle};
use crate::state::make_bitstring_state;

/// `A(t) = ⟨Z(0) Z(t)⟩` of one qubit for a bitstring initial state, with an
/// optional echo normalization `A₀(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrSeries {
    pub qubit: usize,
    pub values: Vec<f64>,
    pub normalization: Option<Vec<f64>>,
}

/// `⟨Z_q(t)⟩` for every `t ∈ 0..=t_max` (outer index) and qubit.
pub fn z_trajectory(inst: &DisorderInstance, bits: &[u8], t_max: usize) -> Result<Vec<Vec<f64>>> {
    check_bits(bits, inst.l)?;
    check_cycles(t_max)?;
    let cycle = PreparedCycle::new(inst);
    let mut state = make_bitstring_state(bits)?;
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(state.expect_z_all());
    for _ in 0..t_max {
        cycle.apply(&mut state)?;
        out.push(state.expect_z_all());
    }
    Ok(out)
}

/// `A_i(t) = z_i(0) ⟨Z_i(t)⟩` for every qubit.
pub fn run_autocorrelator(inst: &DisorderInstance, bits: &[u8], t_max: usize) -> Result<Vec<AutocorrSeries>> {
    let traj = z_trajectory(inst, bits, t_max)?;
    Ok((0..inst.l)
        .map(|q| AutocorrSeries {
            qubit: q,
            values: traj.iter().map(|z| z_sign(bits[q]) * z[q]).collect(),
            normalization: None,
        })
        .collect())
}

/// Mean over qubits of `A_i(t)`, optionally dropping the two edge qubits.
pub fn site_average(series: &[AutocorrSeries], exclude_edges: bool) -> Vec<f64> {
    let l = series.len();
    let chosen: Vec<&AutocorrSeries> = if exclude_edges && l > 2 {
        series[1..l - 1].iter().collect()
    } else {
        series.iter().collect()
    };
    let t_len = chosen[0].values.len();
    (0..t_len)
        .map(|t| chosen.iter().map(|s| s.values[t]).sum::<f64>() / chosen.len() as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::sample_disorder;

    #[test]
    fn exact_flips_at_g_one() {
        let inst = sample_disorder(6, 1.0, 3).unwrap();
        let series = run_autocorrelator(&inst, &[0, 1, 1, 0, 1, 0], 12).unwrap();
        for s in &series {
            for (t, v) in s.values.iter().enumerate() {
                let expected = if t % 2 == 0 { 1.0 } else { -1.0 };
                assert!((v - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bad_inputs() {
        let inst = sample_disorder(4, 0.9, 3).unwrap();
        assert!(run_autocorrelator(&inst, &[0, 1, 0], 3).is_err());
        assert!(run_autocorrelator(&inst, &[0, 1, 0, 2], 3).is_err());
        assert!(run_autocorrelator(&inst, &[0, 1, 0, 1], 10_001).is_err());
    }
}
