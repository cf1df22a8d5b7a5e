//! Dense operator helpers for small systems (`L ≤ 12`), backed by nalgebra.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::gate::{pauli_x, pauli_y, pauli_z, Mat2, C64};
use crate::state::bit_of;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }
}

/// Dense matrix of a product of single-qubit operators on distinct qubits.
pub fn product_operator(n: usize, factors: &[(usize, Mat2)]) -> DMatrix<C64> {
    let dim = 1usize << n;
    DMatrix::from_fn(dim, dim, |r, c| {
        let mut v = C64::new(1.0, 0.0);
        let mut touched = 0usize;
        for (q, m) in factors {
            let b = bit_of(n, *q);
            touched |= 1 << b;
            v *= m[(r >> b) & 1][(c >> b) & 1];
        }
        if (r ^ c) & !touched != 0 {
            C64::new(0.0, 0.0)
        } else {
            v
        }
    })
}

pub fn pauli_string(n: usize, ops: &[(usize, Pauli)]) -> DMatrix<C64> {
    let factors: Vec<(usize, Mat2)> = ops.iter().map(|(q, p)| (*q, p.matrix())).collect();
    product_operator(n, &factors)
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// The phase `γ` maximizing `Re Tr[(e^{iγ} B)† A]`, i.e. `arg Tr(B† A)`.
pub fn optimal_phase(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let t: C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    t.arg()
}

/// `‖A − e^{iγ} B‖₂` with `γ` from [`optimal_phase`].
pub fn phase_aligned_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let g = C64::from_polar(1.0, optimal_phase(a, b));
    spectral_norm(&(a - b * g))
}

/// `exp(−i t H)` for Hermitian `H`.
pub fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -t * l)));
    v * d * v.adjoint()
}

/// `max |H − H†|`.
pub fn hermiticity_deviation(h: &DMatrix<C64>) -> f64 {
    (h - h.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_products() {
        let zz = pauli_string(2, &[(0, Pauli::Z), (1, Pauli::Z)]);
        let diag: Vec<f64> = (0..4).map(|k| zz[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
        let x0 = pauli_string(2, &[(0, Pauli::X)]);
        assert_eq!(x0[(2, 0)], C64::new(1.0, 0.0));
        assert_eq!(x0[(1, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn exponential_of_pauli() {
        let x = pauli_string(1, &[(0, Pauli::X)]);
        let u = expm_hermitian(&x, 0.3);
        let r = crate::gate::rx(0.6);
        for i in 0..2 {
            for j in 0..2 {
                assert!((u[(i, j)] - r[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn phase_alignment_removes_global_phase() {
        let x = pauli_string(2, &[(1, Pauli::Y)]);
        let y = &x * C64::from_polar(1.0, 1.234);
        assert!(phase_aligned_distance(&x, &y) < 1e-14);
    }
}
