use serde::{Deserialize, Serialize};

use super::autocorr::z_trajectory;
use crate::error::{Error, Result};
use crate::floquet::DisorderInstance;

pub const WINDOW: usize = 10;

/// `|ζ₁ − ζ₂| / (|ζ₁| + |ζ₂|)`, taken as 0 when both signals vanish.
pub fn zeta_ratio(z1: f64, z2: f64) -> f64 {
    let den = z1.abs() + z2.abs();
    if den < 1e-12 {
        0.0
    } else {
        (z1 - z2).abs() / den
    }
}

/// Relative polarization difference between two bitstrings that differ at
/// `flip_at`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaField {
    pub flip_at: usize,
    /// `zeta[q][t]` for `t ∈ 0..=t_max`.
    pub zeta: Vec<Vec<f64>>,
    /// `windows[w][q]`: mean of `zeta[q][t]` over `t ∈ 10w+1 ..= 10w+10`,
    /// for every window that fits below `t_max`.
    pub windows: Vec<Vec<f64>>,
}

impl ZetaField {
    /// Per-qubit mean over `t ∈ start..=end`.
    pub fn window_mean(&self, start: usize, end: usize) -> Result<Vec<f64>> {
        let t_len = self.zeta.first().map_or(0, |z| z.len());
        if start > end || end >= t_len {
            return Err(Error::Domain(format!("window {start}..={end} outside 0..{t_len}")));
        }
        let n = (end - start + 1) as f64;
        Ok(self.zeta.iter().map(|z| z[start..=end].iter().sum::<f64>() / n).collect())
    }
}

pub fn run_perturbation(inst: &DisorderInstance, bits: &[u8], flip_at: usize, t_max: usize) -> Result<ZetaField> {
    if flip_at >= inst.l {
        return Err(Error::QubitIndex { index: flip_at, num_qubits: inst.l });
    }
    let mut flipped = bits.to_vec();
    if let Some(b) = flipped.get_mut(flip_at) {
        *b ^= 1;
    }
    let z1 = z_trajectory(inst, bits, t_max)?;
    let z2 = z_trajectory(inst, &flipped, t_max)?;
    let zeta: Vec<Vec<f64>> = (0..inst.l)
        .map(|q| (0..=t_max).map(|t| zeta_ratio(z1[t][q], z2[t][q])).collect())
        .collect();
    let mut field = ZetaField { flip_at, zeta, windows: Vec::new() };
    let n_windows = t_max / WINDOW;
    field.windows = (0..n_windows)
        .map(|w| field.window_mean(WINDOW * w + 1, WINDOW * w + WINDOW))
        .collect::<Result<_>>()?;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::sample_disorder;

    #[test]
    fn initial_profile_and_bounds() {
        let inst = sample_disorder(7, 0.9, 12).unwrap();
        let f = run_perturbation(&inst, &[0, 1, 1, 0, 0, 1, 0], 3, 25).unwrap();
        for q in 0..7 {
            assert_eq!(f.zeta[q][0], if q == 3 { 1.0 } else { 0.0 });
            assert!(f.zeta[q].iter().all(|z| (0.0..=1.0).contains(z)));
        }
        assert_eq!(f.windows.len(), 2);
        assert!(run_perturbation(&inst, &[0; 7], 7, 5).is_err());
    }

    #[test]
    fn ratio_edge_cases() {
        assert_eq!(zeta_ratio(0.0, 0.0), 0.0);
        assert_eq!(zeta_ratio(0.3, 0.3), 0.0);
        assert_eq!(zeta_ratio(0.5, -0.5), 1.0);
        assert!((zeta_ratio(0.4, 0.2) - zeta_ratio(0.04, 0.02)).abs() < 1e-15);
    }
}
