#![allow(dead_code)]

use dtc_core::gate::{cz, kron2, matmul2, matmul4, ry, rz, zz, Mat2, Mat4};
use dtc_core::{fsim_matrix, FsimParams, GateMatrix, C64};
use nalgebra::DMatrix;
use rand::Rng;
use std::f64::consts::PI;

/// Euler-angle single-qubit unitary with a random global phase.
pub fn random_mat2<R: Rng>(rng: &mut R) -> Mat2 {
    let (a, b, c, g) = (rng.random_range(-PI..PI), rng.random_range(0.0..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI));
    let m = matmul2(&matmul2(&rz(a), &ry(b)), &rz(c));
    let ph = C64::from_polar(1.0, g);
    [[m[0][0] * ph, m[0][1] * ph], [m[1][0] * ph, m[1][1] * ph]]
}

/// A generic entangling two-qubit unitary.
pub fn random_mat4<R: Rng>(rng: &mut R) -> Mat4 {
    let p = FsimParams {
        theta: rng.random_range(0.0..PI),
        delta_plus: rng.random_range(-PI..PI),
        delta_minus: rng.random_range(-PI..PI),
        delta_minus_off: rng.random_range(-PI..PI),
        phi: rng.random_range(-PI..PI),
    };
    let f = *fsim_matrix(&p).as_two().unwrap();
    let local = kron2(&random_mat2(rng), &random_mat2(rng));
    let mixer = if rng.random::<bool>() { cz() } else { zz(rng.random_range(-PI..PI)) };
    matmul4(&matmul4(&local, &f), &mixer)
}

pub fn gate1<R: Rng>(rng: &mut R) -> GateMatrix {
    GateMatrix::one(random_mat2(rng)).unwrap()
}

pub fn gate2<R: Rng>(rng: &mut R) -> GateMatrix {
    GateMatrix::two(random_mat4(rng)).unwrap()
}

/// Two distinct qubits in `0..n`, in random order.
pub fn qubit_pair<R: Rng>(rng: &mut R, n: usize) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Dense embedding of a two-qubit matrix acting on `(q1, q2)` with `q1` as
/// the gate's high bit, built entry by entry from the basis action.
pub fn embed_2q(n: usize, q1: usize, q2: usize, m: &Mat4) -> DMatrix<C64> {
    let dim = 1usize << n;
    let b1 = n - 1 - q1;
    let b2 = n - 1 - q2;
    DMatrix::from_fn(dim, dim, |r, c| {
        let rest = !((1usize << b1) | (1usize << b2));
        if r & rest != c & rest {
            return C64::new(0.0, 0.0);
        }
        let local = |k: usize| (((k >> b1) & 1) << 1) | ((k >> b2) & 1);
        m[local(r)][local(c)]
    })
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
