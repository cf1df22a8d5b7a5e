//! In-place amplitude kernels over a flat complex buffer.
//!
//! Kernels address qubits by bit position in the amplitude index (0 is the
//! least significant bit). Callers translate qubit labels to positions. The
//! density-matrix engine reuses the same kernels on its vectorized entries.

use crate::exec::ExecMode;
use crate::gate::{Mat2, Mat4, C64};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Buffers shorter than this are never split across threads.
pub const PAR_THRESHOLD: usize = 1 << 14;

#[cfg(feature = "parallel")]
#[inline]
fn go_parallel(mode: ExecMode, len: usize) -> bool {
    mode.is_parallel() && len >= PAR_THRESHOLD
}

#[inline]
fn mix2(m: &Mat2, a: &mut C64, b: &mut C64) {
    let (x, y) = (*a, *b);
    *a = m[0][0] * x + m[0][1] * y;
    *b = m[1][0] * x + m[1][1] * y;
}

fn one_qubit_chunk(chunk: &mut [C64], stride: usize, m: &Mat2) {
    let (lo, hi) = chunk.split_at_mut(stride);
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        mix2(m, a, b);
    }
}

/// Applies `m` to the qubit at bit position `bit`.
pub fn apply_1q(amps: &mut [C64], bit: usize, m: &Mat2, mode: ExecMode) {
    let stride = 1usize << bit;
    debug_assert!(amps.len() >= 2 * stride);
    #[cfg(feature = "parallel")]
    if go_parallel(mode, amps.len()) {
        let chunks = amps.len() / (2 * stride);
        if chunks >= 64 {
            amps.par_chunks_mut(2 * stride)
                .for_each(|chunk| one_qubit_chunk(chunk, stride, m));
        } else {
            for chunk in amps.chunks_mut(2 * stride) {
                let (lo, hi) = chunk.split_at_mut(stride);
                lo.par_iter_mut()
                    .zip(hi.par_iter_mut())
                    .with_min_len(1024)
                    .for_each(|(a, b)| mix2(m, a, b));
            }
        }
        return;
    }
    let _ = mode;
    for chunk in amps.chunks_mut(2 * stride) {
        one_qubit_chunk(chunk, stride, m);
    }
}

#[inline]
fn mix4(m: &Mat4, a0: &mut C64, a1: &mut C64, a2: &mut C64, a3: &mut C64) {
    let v = [*a0, *a1, *a2, *a3];
    let row = |r: usize| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
    *a0 = row(0);
    *a1 = row(1);
    *a2 = row(2);
    *a3 = row(3);
}

/// Visits every quadruple of amplitudes that differ only in the bits
/// `hi > lo`, passing them as `(hi=0 lo=0, hi=0 lo=1, hi=1 lo=0, hi=1 lo=1)`.
fn for_each_quad<F>(amps: &mut [C64], hi: usize, lo: usize, mode: ExecMode, f: F)
where
    F: Fn(&mut C64, &mut C64, &mut C64, &mut C64) + Sync + Send,
{
    let hi_stride = 1usize << hi;
    let lo_stride = 1usize << lo;
    debug_assert!(hi > lo && amps.len() >= 2 * hi_stride);
    let block = |c0: &mut [C64], c1: &mut [C64]| {
        let (c00, c01) = c0.split_at_mut(lo_stride);
        let (c10, c11) = c1.split_at_mut(lo_stride);
        for (((a, b), c), d) in c00.iter_mut().zip(c01.iter_mut()).zip(c10.iter_mut()).zip(c11.iter_mut()) {
            f(a, b, c, d);
        }
    };
    let chunk_work = |chunk: &mut [C64]| {
        let (h0, h1) = chunk.split_at_mut(hi_stride);
        for (c0, c1) in h0.chunks_mut(2 * lo_stride).zip(h1.chunks_mut(2 * lo_stride)) {
            block(c0, c1);
        }
    };
    #[cfg(feature = "parallel")]
    if go_parallel(mode, amps.len()) {
        if amps.len() / (2 * hi_stride) >= 16 {
            amps.par_chunks_mut(2 * hi_stride).for_each(chunk_work);
        } else {
            for chunk in amps.chunks_mut(2 * hi_stride) {
                let (h0, h1) = chunk.split_at_mut(hi_stride);
                h0.par_chunks_mut(2 * lo_stride)
                    .zip(h1.par_chunks_mut(2 * lo_stride))
                    .for_each(|(c0, c1)| block(c0, c1));
            }
        }
        return;
    }
    let _ = mode;
    amps.chunks_mut(2 * hi_stride).for_each(chunk_work);
}

/// Applies `m` to the qubit pair at bit positions `(bit1, bit2)`, where
/// `bit1` carries the gate's high local index.
pub fn apply_2q(amps: &mut [C64], bit1: usize, bit2: usize, m: &Mat4, mode: ExecMode) {
    assert_ne!(bit1, bit2);
    if bit1 > bit2 {
        for_each_quad(amps, bit1, bit2, mode, |a, b, c, d| mix4(m, a, b, c, d));
    } else {
        for_each_quad(amps, bit2, bit1, mode, |a, b, c, d| mix4(m, a, c, b, d));
    }
}

/// Elementwise product with a precomputed diagonal: `amps[k] *= diag[k >> shift]`.
pub fn apply_diagonal(amps: &mut [C64], diag: &[C64], shift: usize, mode: ExecMode) {
    debug_assert_eq!(amps.len() >> shift, diag.len());
    #[cfg(feature = "parallel")]
    if go_parallel(mode, amps.len()) {
        amps.par_chunks_mut(1 << shift)
            .zip(diag.par_iter())
            .with_min_len(1024)
            .for_each(|(chunk, d)| chunk.iter_mut().for_each(|a| *a *= d));
        return;
    }
    let _ = mode;
    for (chunk, d) in amps.chunks_mut(1 << shift).zip(diag.iter()) {
        for a in chunk {
            *a *= d;
        }
    }
}

/// Depolarizing action on a `(row bit, column bit)` pair of a vectorized
/// density matrix. `c = 1 − 4p/3` scales the off-diagonal block; the diagonal
/// block mixes with weights `(1+c)/2`, `(1−c)/2`.
pub fn depolarize_pair(amps: &mut [C64], row_bit: usize, col_bit: usize, c: f64, mode: ExecMode) {
    let a = 0.5 * (1.0 + c);
    let b = 0.5 * (1.0 - c);
    // Both bits equal on the diagonal block regardless of which is higher.
    let (hi, lo) = if row_bit > col_bit { (row_bit, col_bit) } else { (col_bit, row_bit) };
    for_each_quad(amps, hi, lo, mode, |r00, r01, r10, r11| {
        let (x, y) = (*r00, *r11);
        *r00 = x * a + y * b;
        *r11 = x * b + y * a;
        *r01 *= c;
        *r10 *= c;
    });
}

/// Reduction block length. Partial sums over fixed blocks are added in
/// block order, so a reduction gives the same bits in either mode and for
/// any thread count.
const REDUCE_BLOCK: usize = 4096;

fn block_sum<T, F>(n: usize, mode: ExecMode, zero: T, f: F) -> T
where
    T: Copy + Send + std::ops::Add<Output = T>,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let blocks = n.div_ceil(REDUCE_BLOCK);
    let range = |k: usize| k * REDUCE_BLOCK..((k + 1) * REDUCE_BLOCK).min(n);
    #[cfg(feature = "parallel")]
    if go_parallel(mode, n) {
        let partial: Vec<T> = (0..blocks).into_par_iter().map(|k| f(range(k))).collect();
        return partial.into_iter().fold(zero, |a, b| a + b);
    }
    let _ = mode;
    (0..blocks).map(|k| f(range(k))).fold(zero, |a, b| a + b)
}

/// `Σ_k |amps_k|²`.
pub fn norm_sqr(amps: &[C64], mode: ExecMode) -> f64 {
    block_sum(amps.len(), mode, 0.0, |r| amps[r].iter().map(|a| a.norm_sqr()).sum())
}

/// `Σ_k conj(a_k) b_k`.
pub fn inner(a: &[C64], b: &[C64], mode: ExecMode) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    block_sum(a.len(), mode, C64::new(0.0, 0.0), |r| a[r.clone()].iter().zip(&b[r]).map(|(x, y)| x.conj() * y).sum())
}
