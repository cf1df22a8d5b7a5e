//! Effective Hamiltonians over two drive periods, bitstring energies, and
//! the bitstring gauge map of the disordered drive.
//!
//! With `ε = (π/2)(1 − g)` the uniform-coupling drive satisfies
//! `U_F² ≈ e^{−2iH}` with
//!
//! `H = Σ_n −(ε/2)[(1 + cos h_n) X_n + sin h_n Y_n] + (φ̄/4) Z_n Z_{n+1}`
//!
//! to leading order in `ε` and `φ̄`. For couplings `φ_n = −π + δφ_n` the
//! perfect `π/2` Ising part is pulled out of both periods, which conjugates
//! the x-kick into three-body terms and leaves a frame factor `Z_0 Z_{L−1}`
//! from the open ends.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dense::{expm_hermitian, pauli_string, phase_aligned_distance, Pauli};
use crate::error::{Error, Result};
use crate::floquet::{dense_of_map, CouplingMode, DisorderInstance, PreparedCycle, PHI_MAX, PHI_MIN};
use crate::gate::{rx, rz, C64};
use crate::dense::product_operator;

/// Largest system for the dense routines here.
pub const MAX_DENSE_QUBITS: usize = 10;

/// `ε = (π/2)(1 − g)`.
pub fn epsilon(g: f64) -> f64 {
    0.5 * PI * (1.0 - g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: Vec<(usize, Pauli)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveHamiltonian {
    pub l: usize,
    pub epsilon: f64,
    pub terms: Vec<PauliTerm>,
}

impl EffectiveHamiltonian {
    fn coeff_of(&self, ops: &[(usize, Pauli)]) -> f64 {
        self.terms.iter().filter(|t| t.ops == ops).map(|t| t.coeff).sum()
    }

    pub fn x_coeffs(&self) -> Vec<f64> {
        (0..self.l).map(|q| self.coeff_of(&[(q, Pauli::X)])).collect()
    }

    pub fn y_coeffs(&self) -> Vec<f64> {
        (0..self.l).map(|q| self.coeff_of(&[(q, Pauli::Y)])).collect()
    }

    pub fn zz_coeffs(&self) -> Vec<f64> {
        (0..self.l.saturating_sub(1)).map(|b| self.coeff_of(&[(b, Pauli::Z), (b + 1, Pauli::Z)])).collect()
    }

    /// Terms acting on more than one qubit with a non-Z factor.
    pub fn dressed_terms(&self) -> Vec<&PauliTerm> {
        self.terms
            .iter()
            .filter(|t| t.ops.len() > 1 && t.ops.iter().any(|(_, p)| *p != Pauli::Z))
            .collect()
    }

    pub fn dense(&self) -> Result<DMatrix<C64>> {
        if self.l > 12 {
            return Err(Error::Resource(format!("dense Hamiltonian on {} qubits", self.l)));
        }
        let dim = 1usize << self.l;
        let mut h = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            h += pauli_string(self.l, &t.ops) * C64::new(t.coeff, 0.0);
        }
        Ok(h)
    }

    /// `⟨s|H|s⟩`; only all-Z terms contribute.
    pub fn diagonal_energy(&self, bits: &[u8]) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.ops.iter().all(|(_, p)| *p == Pauli::Z))
            .map(|t| {
                let parity = t.ops.iter().map(|(q, _)| bits[*q] as usize).sum::<usize>() % 2;
                if parity == 0 { t.coeff } else { -t.coeff }
            })
            .sum()
    }
}

fn term(coeff: f64, ops: &[(usize, Pauli)]) -> PauliTerm {
    PauliTerm { coeff, ops: ops.to_vec() }
}

/// Leading-order effective Hamiltonian of the uniform-coupling drive.
pub fn heff_uniform(inst: &DisorderInstance) -> Result<EffectiveHamiltonian> {
    let phi_bar = match inst.mode {
        CouplingMode::Uniform { phi_bar } => phi_bar,
        _ => return Err(Error::Mode("uniform-coupling instance required")),
    };
    let eps = epsilon(inst.g);
    let mut terms = Vec::new();
    for (n, h) in inst.h.iter().enumerate() {
        terms.push(term(-0.5 * eps * (1.0 + h.cos()), &[(n, Pauli::X)]));
        terms.push(term(-0.5 * eps * h.sin(), &[(n, Pauli::Y)]));
    }
    for b in 0..inst.l - 1 {
        terms.push(term(phi_bar / 4.0, &[(b, Pauli::Z), (b + 1, Pauli::Z)]));
    }
    Ok(EffectiveHamiltonian { l: inst.l, epsilon: eps, terms })
}

/// Leading-order effective Hamiltonian for couplings near `−π`. A
/// qualitative approximation: it describes `U_F²` only up to the frame
/// factor `Z_0 Z_{L−1}` (see [`disordered_frame`]) and only for small
/// `δφ_n = φ_n + π`.
pub fn heff_disordered(inst: &DisorderInstance) -> Result<EffectiveHamiltonian> {
    if matches!(inst.mode, CouplingMode::Uniform { .. }) {
        return Err(Error::Mode("disordered-coupling instance required"));
    }
    let l = inst.l;
    let eps = epsilon(inst.g);
    let mut terms = Vec::new();
    for (b, phi) in inst.phi.iter().enumerate() {
        terms.push(term((phi + PI) / 4.0, &[(b, Pauli::Z), (b + 1, Pauli::Z)]));
    }
    for n in 0..l {
        terms.push(term(-0.5 * eps, &[(n, Pauli::X)]));
        let (s, c) = inst.h[n].sin_cos();
        if l == 1 {
            continue;
        }
        if n > 0 && n < l - 1 {
            let nb = |p: Pauli| vec![(n - 1, Pauli::Z), (n, p), (n + 1, Pauli::Z)];
            terms.push(PauliTerm { coeff: 0.5 * eps * c, ops: nb(Pauli::X) });
            terms.push(PauliTerm { coeff: 0.5 * eps * s, ops: nb(Pauli::Y) });
        } else {
            let other = if n == 0 { 1 } else { l - 2 };
            let pair = |p: Pauli| {
                let mut v = vec![(n, p), (other, Pauli::Z)];
                v.sort_by_key(|(q, _)| *q);
                v
            };
            terms.push(PauliTerm { coeff: -0.5 * eps * c, ops: pair(Pauli::Y) });
            terms.push(PauliTerm { coeff: 0.5 * eps * s, ops: pair(Pauli::X) });
        }
    }
    Ok(EffectiveHamiltonian { l, epsilon: eps, terms })
}

/// `Z_0 Z_{L−1}`: what the two perfect `π/2` Ising layers leave behind on an
/// open chain.
pub fn disordered_frame(l: usize) -> DMatrix<C64> {
    pauli_string(l, &[(0, Pauli::Z), (l - 1, Pauli::Z)])
}

/// `(φ̄/4) Σ_n (−1)^{s_n + s_{n+1}}`.
pub fn bitstring_energy_uniform(bits: &[u8], phi_bar: f64) -> f64 {
    bits.windows(2).map(|w| if w[0] == w[1] { phi_bar / 4.0 } else { -phi_bar / 4.0 }).sum()
}

/// `Σ_n (δφ_n/4) (−1)^{s_n + s_{n+1}}`.
pub fn bitstring_energy_disordered(bits: &[u8], delta_phi: &[f64]) -> Result<f64> {
    if delta_phi.len() + 1 != bits.len() {
        return Err(Error::SizeMismatch { context: "couplings vs bitstring", expected: bits.len().saturating_sub(1), got: delta_phi.len() });
    }
    Ok(bits
        .windows(2)
        .zip(delta_phi)
        .map(|(w, d)| if w[0] == w[1] { d / 4.0 } else { -d / 4.0 })
        .sum())
}

/// Dense `U_F` (`L ≤ 10`).
pub fn dense_cycle(inst: &DisorderInstance) -> Result<DMatrix<C64>> {
    if inst.l > MAX_DENSE_QUBITS {
        return Err(Error::Resource(format!("dense cycle on {} qubits", inst.l)));
    }
    let cycle = PreparedCycle::new(inst);
    dense_of_map(inst.l, |s| cycle.apply(s))
}

/// Dense `U_z[φ, h] = exp(−i Σ (φ_n/4) Z_n Z_{n+1} − i Σ (h_n/2) Z_n)`.
pub fn dense_uz(l: usize, phi: &[f64], h: &[f64]) -> DMatrix<C64> {
    let dim = 1usize << l;
    DMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            return C64::new(0.0, 0.0);
        }
        let z = |q: usize| if (r >> (l - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 };
        let mut a = 0.0;
        for (b, p) in phi.iter().enumerate() {
            a += p / 4.0 * z(b) * z(b + 1);
        }
        for (q, hq) in h.iter().enumerate() {
            a += hq / 2.0 * z(q);
        }
        C64::from_polar(1.0, -a)
    })
}

/// Dense `U_x[θ] = exp(−i (θ/2) Σ X_n)`.
pub fn dense_ux(l: usize, theta: f64) -> DMatrix<C64> {
    let m = rx(theta);
    product_operator(l, &(0..l).map(|q| (q, m)).collect::<Vec<_>>())
}

/// Right-hand side of the exact two-period rewrite of the uniform drive,
///
/// `U_F² = (−1)^L U_z[φ̄, 0] · exp(iε Σ (cos h_n X_n + sin h_n Y_n)) · U_z[φ̄, 0] · U_x[−2ε]`,
///
/// where `(−1)^L` is the phase of the two perfect π pulses.
pub fn two_period_rewrite(inst: &DisorderInstance) -> Result<DMatrix<C64>> {
    let phi_bar = match inst.mode {
        CouplingMode::Uniform { phi_bar } => phi_bar,
        _ => return Err(Error::Mode("uniform-coupling instance required")),
    };
    let l = inst.l;
    if l > MAX_DENSE_QUBITS {
        return Err(Error::Resource(format!("dense rewrite on {l} qubits")));
    }
    let eps = epsilon(inst.g);
    let uz = dense_uz(l, &vec![phi_bar; l - 1], &vec![0.0; l]);
    // exp(iε(cos h X + sin h Y)) = rz(h) exp(iεX) rz(h)† per qubit.
    let kicks: Vec<(usize, crate::gate::Mat2)> = inst
        .h
        .iter()
        .enumerate()
        .map(|(q, h)| {
            let m = crate::gate::matmul2(&crate::gate::matmul2(&rz(*h), &rx(-2.0 * eps)), &rz(-*h));
            (q, m)
        })
        .collect();
    let kick = product_operator(l, &kicks);
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    Ok((&uz * kick * &uz * dense_ux(l, -2.0 * eps)) * C64::new(sign, 0.0))
}

/// `‖U_F² − e^{iγ} e^{−2iH}‖₂` with `H` from [`heff_uniform`] and the
/// phase `γ` chosen optimally.
pub fn bch_residual(inst: &DisorderInstance) -> Result<f64> {
    let h = heff_uniform(inst)?.dense()?;
    let u = dense_cycle(inst)?;
    Ok(phase_aligned_distance(&(&u * &u), &expm_hermitian(&h, 2.0)))
}

/// `‖U_F² − e^{iγ} Z_0 Z_{L−1} e^{−2iH}‖₂` with `H` from [`heff_disordered`].
pub fn bch_residual_disordered(inst: &DisorderInstance) -> Result<f64> {
    let h = heff_disordered(inst)?.dense()?;
    let u = dense_cycle(inst)?;
    let approx = disordered_frame(inst.l) * expm_hermitian(&h, 2.0);
    Ok(phase_aligned_distance(&(&u * &u), &approx))
}

/// A disorder instance rewritten so that bitstring `bits` maps to the
/// all-zero bitstring: `X_s U_F[φ, h] X_s ∝ U_F[φ″, h″]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeMappedInstance {
    pub original: DisorderInstance,
    pub bits: Vec<u8>,
    pub phi: Vec<f64>,
    pub h: Vec<f64>,
}

impl GaugeMappedInstance {
    pub fn to_instance(&self) -> DisorderInstance {
        DisorderInstance { phi: self.phi.clone(), h: self.h.clone(), ..self.original.clone() }
    }
}

fn wrap_field(h: f64) -> f64 {
    // A 2π shift of a field angle is a global phase.
    if h > PI {
        h - 2.0 * PI
    } else if h < -PI {
        h + 2.0 * PI
    } else {
        h
    }
}

/// Signs are flipped by `X_s` (`φ′ = (−1)^{s_i+s_{i+1}} φ`, `h′ = (−1)^{s_i} h`);
/// every bond with `s_i ≠ s_{i+1}` is folded back by `−2π`, and each qubit
/// touching an odd number of folded bonds absorbs a `π` field shift. At the
/// chain ends a qubit has a single bond to count.
pub fn gauge_map(inst: &DisorderInstance, bits: &[u8]) -> Result<GaugeMappedInstance> {
    if matches!(inst.mode, CouplingMode::Uniform { .. }) {
        return Err(Error::Mode("disordered-coupling instance required"));
    }
    if bits.len() != inst.l {
        return Err(Error::SizeMismatch { context: "bitstring length", expected: inst.l, got: bits.len() });
    }
    if bits.iter().any(|b| *b > 1) {
        return Err(Error::InvalidBit);
    }
    let folded: Vec<bool> = bits.windows(2).map(|w| w[0] != w[1]).collect();
    let phi = inst
        .phi
        .iter()
        .zip(&folded)
        .map(|(p, f)| if *f { -p - 2.0 * PI } else { *p })
        .collect();
    let h = (0..inst.l)
        .map(|i| {
            let hp = if bits[i] == 1 { -inst.h[i] } else { inst.h[i] };
            let left = i > 0 && folded[i - 1];
            let right = i + 1 < inst.l && folded[i];
            if left ^ right { wrap_field(hp + PI) } else { hp }
        })
        .collect();
    Ok(GaugeMappedInstance { original: inst.clone(), bits: bits.to_vec(), phi, h })
}

/// Whether every mapped coupling is back in the sampling interval.
pub fn mapped_in_range(m: &GaugeMappedInstance) -> bool {
    m.phi.iter().all(|p| (PHI_MIN - 1e-12..=PHI_MAX + 1e-12).contains(p))
        && m.h.iter().all(|h| (-PI..=PI).contains(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{sample_disorder, uniform_instance};

    #[test]
    fn uniform_coefficients() {
        let inst = uniform_instance(5, 1.0, -0.4, 3).unwrap();
        let h = heff_uniform(&inst).unwrap();
        assert!(h.x_coeffs().iter().chain(h.y_coeffs().iter()).all(|c| *c == 0.0));
        assert!(h.zz_coeffs().iter().all(|c| (*c + 0.1).abs() < 1e-15));

        let mut flat = uniform_instance(4, 0.9, -0.4, 3).unwrap();
        flat.h = vec![0.0; 4];
        let h = heff_uniform(&flat).unwrap();
        let eps = epsilon(0.9);
        assert!(h.x_coeffs().iter().all(|c| (c.abs() - eps).abs() < 1e-15));
        assert!(h.y_coeffs().iter().all(|c| *c == 0.0));
        flat.h = vec![PI; 4];
        let h = heff_uniform(&flat).unwrap();
        assert!(h.x_coeffs().iter().chain(h.y_coeffs().iter()).all(|c| c.abs() < 1e-15));
        assert!(heff_uniform(&sample_disorder(4, 0.9, 1).unwrap()).is_err());
    }

    #[test]
    fn energies() {
        let pol = vec![0u8; 20];
        let neel: Vec<u8> = (0..20).map(|q| (q % 2) as u8).collect();
        assert!((bitstring_energy_uniform(&pol, -0.4) + 1.9).abs() < 1e-12);
        assert!((bitstring_energy_uniform(&neel, -0.4) - 1.9).abs() < 1e-12);
        assert_eq!(bitstring_energy_disordered(&[0, 1, 1], &[0.0, 0.0]).unwrap(), 0.0);
        assert!((bitstring_energy_disordered(&[0, 0], &[0.2]).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn gauge_map_trivial_and_ranges() {
        let inst = sample_disorder(6, 0.9, 4).unwrap();
        let m = gauge_map(&inst, &[0; 6]).unwrap();
        assert_eq!((m.phi.clone(), m.h.clone()), (inst.phi.clone(), inst.h.clone()));
        let m = gauge_map(&inst, &[0, 1, 1, 0, 1, 1]).unwrap();
        assert!(mapped_in_range(&m));
    }
}
