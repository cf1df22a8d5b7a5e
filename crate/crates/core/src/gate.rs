//! Small dense gate matrices and single-qubit Kraus channels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

/// Tolerance used when validating user-supplied gates and channels.
pub const VALIDATION_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// A validated one- or two-qubit unitary.
///
/// For two-qubit gates the first qubit passed at application time is the
/// high bit of the local basis index, so the basis order is
/// `|00>, |01>, |10>, |11>` with the first qubit on the left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateMatrix {
    One(Mat2),
    Two(Mat4),
}

impl GateMatrix {
    /// Validates unitarity to [`VALIDATION_TOL`].
    pub fn one(m: Mat2) -> Result<Self> {
        let deviation = unitarity_deviation2(&m);
        if deviation > VALIDATION_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(GateMatrix::One(m))
    }

    /// Validates unitarity to [`VALIDATION_TOL`].
    pub fn two(m: Mat4) -> Result<Self> {
        let deviation = unitarity_deviation4(&m);
        if deviation > VALIDATION_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(GateMatrix::Two(m))
    }

    pub fn arity(&self) -> usize {
        match self {
            GateMatrix::One(_) => 1,
            GateMatrix::Two(_) => 2,
        }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        match self {
            GateMatrix::One(m) => unitarity_deviation2(m),
            GateMatrix::Two(m) => unitarity_deviation4(m),
        }
    }

    pub fn as_one(&self) -> Result<&Mat2> {
        match self {
            GateMatrix::One(m) => Ok(m),
            GateMatrix::Two(_) => Err(Error::Arity { expected: 1, got: 2 }),
        }
    }

    pub fn as_two(&self) -> Result<&Mat4> {
        match self {
            GateMatrix::Two(m) => Ok(m),
            GateMatrix::One(_) => Err(Error::Arity { expected: 2, got: 1 }),
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            GateMatrix::One(m) => GateMatrix::One(adjoint2(m)),
            GateMatrix::Two(m) => GateMatrix::Two(adjoint4(m)),
        }
    }
}

pub fn unitarity_deviation2(m: &Mat2) -> f64 {
    let p = matmul2(&adjoint2(m), m);
    let mut worst: f64 = 0.0;
    for (r, row) in p.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

pub fn unitarity_deviation4(m: &Mat4) -> f64 {
    let p = matmul4(&adjoint4(m), m);
    let mut worst: f64 = 0.0;
    for (r, row) in p.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

pub fn matmul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn matmul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

pub fn adjoint2(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

pub fn adjoint4(m: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = m[c][r].conj();
        }
    }
    out
}

pub fn conj2(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}

pub fn conj4(m: &Mat4) -> Mat4 {
    let mut out = *m;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v = v.conj();
        }
    }
    out
}

/// `a ⊗ b`, with `a` acting on the high bit.
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for ar in 0..2 {
        for ac in 0..2 {
            for br in 0..2 {
                for bc in 0..2 {
                    out[2 * ar + br][2 * ac + bc] = a[ar][ac] * b[br][bc];
                }
            }
        }
    }
    out
}

pub fn diag4(d: [C64; 4]) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for k in 0..4 {
        out[k][k] = d[k];
    }
    out
}

pub fn identity2() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn identity4() -> Mat4 {
    diag4([ONE; 4])
}

pub fn pauli_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y() -> Mat2 {
    [[ZERO, -I], [I, ZERO]]
}

pub fn pauli_z() -> Mat2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

pub fn hadamard() -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[C64::new(s, 0.0), C64::new(s, 0.0)], [C64::new(s, 0.0), C64::new(-s, 0.0)]]
}

/// `exp(-i θ X / 2)`.
pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
}

/// `exp(-i θ Y / 2)`.
pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
}

/// `exp(-i θ Z / 2)`.
pub fn rz(theta: f64) -> Mat2 {
    [[cis(-theta / 2.0), ZERO], [ZERO, cis(theta / 2.0)]]
}

/// Rotation by `theta` about the equatorial axis `cos χ X + sin χ Y`.
pub fn r_equatorial(theta: f64, chi: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), -I * s * cis(-chi)],
        [-I * s * cis(chi), C64::new(c, 0.0)],
    ]
}

/// `diag(1, e^{iα})`.
pub fn phase(alpha: f64) -> Mat2 {
    [[ONE, ZERO], [ZERO, cis(alpha)]]
}

pub fn cz() -> Mat4 {
    diag4([ONE, ONE, ONE, -ONE])
}

/// `diag(1, 1, 1, e^{-iφ})`.
pub fn cphase(phi: f64) -> Mat4 {
    diag4([ONE, ONE, ONE, cis(-phi)])
}

/// `exp(-i (φ/4) Z⊗Z)`.
pub fn zz(phi: f64) -> Mat4 {
    let a = cis(-phi / 4.0);
    let b = cis(phi / 4.0);
    diag4([a, b, b, a])
}

/// A single-qubit channel in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<Mat2>,
}

impl KrausChannel {
    /// Completeness `Σ K†K = I` is checked to 1e-12.
    pub fn new(operators: Vec<Mat2>) -> Result<Self> {
        let deviation = completeness_deviation(&operators);
        if operators.is_empty() || deviation > 1e-12 {
            return Err(Error::IncompleteChannel { deviation });
        }
        Ok(KrausChannel { operators })
    }

    pub fn identity() -> Self {
        KrausChannel { operators: vec![identity2()] }
    }

    /// `√(1−p) I` plus `√(p/3)` times each Pauli.
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_depolarizing_p(p)?;
        let a = C64::new((1.0 - p).sqrt(), 0.0);
        let b = C64::new((p / 3.0).sqrt(), 0.0);
        let scale = |m: Mat2, s: C64| [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]];
        KrausChannel::new(vec![
            scale(identity2(), a),
            scale(pauli_x(), b),
            scale(pauli_y(), b),
            scale(pauli_z(), b),
        ])
    }

    pub fn operators(&self) -> &[Mat2] {
        &self.operators
    }

    /// Superoperator acting on the `(row bit, column bit)` pair of a
    /// vectorized density matrix: `Σ K ⊗ conj(K)`.
    pub fn superoperator(&self) -> Mat4 {
        let mut out = [[ZERO; 4]; 4];
        for k in &self.operators {
            let term = kron2(k, &conj2(k));
            for r in 0..4 {
                for c in 0..4 {
                    out[r][c] += term[r][c];
                }
            }
        }
        out
    }
}

pub fn completeness_deviation(ops: &[Mat2]) -> f64 {
    let mut sum = [[ZERO; 2]; 2];
    for k in ops {
        let p = matmul2(&adjoint2(k), k);
        for r in 0..2 {
            for c in 0..2 {
                sum[r][c] += p[r][c];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((sum[r][c] - target).norm());
        }
    }
    worst
}

pub fn check_depolarizing_p(p: f64) -> Result<()> {
    if !(0.0..=0.75).contains(&p) || p.is_nan() {
        return Err(Error::OutOfRange { name: "p", value: p, min: 0.0, max: 0.75 });
    }
    Ok(())
}
