//! Simulated calibration sequences for FSIM gates and the fits that
//! recover `Δ₋`, `Δ₊`, `φ` and `θ` from them.
//!
//! Qubit `a` is the first (high) qubit of the FSIM matrix and `b` the
//! second. The sweep gate of the `Δ₋` sequence is `Z(ξ) = diag(1, e^{−iξ})`,
//! which makes the fitted offsets satisfy `ξ_a − ξ_b = 2dΔ₋` when `θ = 0`.

pub mod fit;

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use fit::{fit_cosine, fit_line, wrap_angle, CosineFit, LineFit};

use crate::error::{Error, Result};
use crate::floquet::{fsim_matrix, FsimParams};
use crate::gate::{hadamard, phase, r_equatorial, ry, Mat2, Mat4};
use crate::state::{make_bitstring_state, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Cosine,
    Line,
    Sinusoid,
}

/// One calibrated parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFit {
    pub parameter: String,
    pub estimate: f64,
    pub residual_rms: f64,
    pub kind: FitKind,
    /// Set when the fit is ill-conditioned (flat curve, phase-unwrap
    /// ambiguity, amplitude at the edge of its invertible branch).
    pub flagged: bool,
}

fn fsim4(p: &FsimParams) -> Mat4 {
    match fsim_matrix(p) {
        crate::gate::GateMatrix::Two(m) => m,
        crate::gate::GateMatrix::One(_) => unreachable!("FSIM is a two-qubit gate"),
    }
}

/// `|+⟩` on `excited`, `|other_bit⟩` on the partner, then `d` FSIM gates.
fn ramsey_state(p: &FsimParams, d: usize, excited: usize, other_bit: u8) -> Result<StateVector> {
    let mut bits = [0u8; 2];
    bits[1 - excited] = other_bit;
    let mut s = make_bitstring_state(&bits)?;
    s.apply_mat2(excited, &hadamard());
    let m = fsim4(p);
    for _ in 0..d {
        s.apply_mat4(0, 1, &m);
    }
    Ok(s)
}

/// `P₁` of the excited qubit after `Z(ξ)` and `√Y`.
fn delta_minus_p1(base: &StateVector, excited: usize, xi: f64) -> Result<f64> {
    let mut s = base.clone();
    let z: Mat2 = phase(-xi);
    s.apply_mat2(excited, &z);
    s.apply_mat2(excited, &ry(PI / 2.0));
    Ok(0.5 * (1.0 - s.expect_z(excited)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaMinusResult {
    pub xi_grid: Vec<f64>,
    /// `P₁` curves for qubit a and qubit b.
    pub curves: [Vec<f64>; 2],
    pub fits: [CosineFit; 2],
    /// `(ξ_a − ξ_b) / (2d)`.
    pub fit: CalibrationFit,
}

/// The two Ramsey-like `Δ₋` sequences at depth `d`.
pub fn simulate_delta_minus(p: &FsimParams, d: usize, xi_grid: &[f64]) -> Result<DeltaMinusResult> {
    if d == 0 {
        return Err(Error::Domain("depth must be at least 1".into()));
    }
    let mut curves: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut fits = Vec::with_capacity(2);
    for (excited, curve) in curves.iter_mut().enumerate() {
        let base = ramsey_state(p, d, excited, 0)?;
        *curve = xi_grid.iter().map(|xi| delta_minus_p1(&base, excited, *xi)).collect::<Result<_>>()?;
        fits.push(fit_cosine(xi_grid, curve)?);
    }
    let flagged = fits.iter().any(|f| f.b1 < 1e-6);
    let half = wrap_angle(fits[0].xi0 - fits[1].xi0) / 2.0;
    let fit = CalibrationFit {
        parameter: "delta_minus".into(),
        estimate: half / d as f64,
        residual_rms: fits[0].rms.max(fits[1].rms),
        kind: FitKind::Cosine,
        flagged,
    };
    Ok(DeltaMinusResult { xi_grid: xi_grid.to_vec(), curves, fits: [fits[0], fits[1]], fit })
}

/// Half phase difference `(ξ_a − ξ_b)/2` produced by `d` FSIM gates with
/// iSWAP angle `theta`. Within the one-excitation block the gate is
/// `e^{iΔ₊}(cos Ω + i sin Ω n·σ)` with `cos Ω = cos θ cos Δ₋` and
/// `n_z sin Ω = cos θ sin Δ₋`.
pub fn delta_minus_phase(delta_minus: f64, theta: f64, d: usize) -> f64 {
    let c = theta.cos();
    let cos_omega = (c * delta_minus.cos()).clamp(-1.0, 1.0);
    let omega = cos_omega.acos();
    let nz_sin = c * delta_minus.sin();
    let d = d as f64;
    let (re, im) = if omega.abs() < 1e-300 {
        (1.0, d * nz_sin)
    } else {
        ((d * omega).cos(), (d * omega).sin() * nz_sin / omega.sin())
    };
    im.atan2(re)
}

/// Inverts [`delta_minus_phase`] for `Δ₋` given `θ`, taking the root
/// nearest the plain estimate within ±0.25 rad. Returns `None` if none is
/// bracketed there.
pub fn correct_delta_minus(plain: f64, theta: f64, d: usize) -> Option<f64> {
    let target = plain * d as f64;
    let f = |x: f64| wrap_angle(delta_minus_phase(x, theta, d) - target);
    let steps = 500;
    let (a, b) = (plain - 0.25, plain + 0.25);
    let h = (b - a) / steps as f64;
    let mut best: Option<f64> = None;
    let mut x0 = a;
    let mut f0 = f(x0);
    for k in 1..=steps {
        let x1 = a + h * k as f64;
        let f1 = f(x1);
        // A sign change across a ±π branch jump is not a root.
        if f0.signum() != f1.signum() && (f0 - f1).abs() < PI {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            if best.is_none_or(|r| (r - plain).abs() > (root - plain).abs()) {
                best = Some(root);
            }
        } else if f1 == 0.0 {
            best = best.or(Some(x1));
        }
        x0 = x1;
        f0 = f1;
    }
    best
}

/// Bloch-vector angle `atan2(⟨Y⟩, ⟨X⟩)` of `qubit`.
fn bloch_angle(s: &StateVector, qubit: usize) -> Result<f64> {
    Ok(s.expect_y(qubit)?.atan2(s.expect_x(qubit)?))
}

/// The four phase angles `(α₁, α₂, α₃, α₄)` at depth `d`.
pub fn phase_angles(p: &FsimParams, d: usize) -> Result<[f64; 4]> {
    let a1 = bloch_angle(&ramsey_state(p, d, 0, 0)?, 0)?;
    let a2 = bloch_angle(&ramsey_state(p, d, 1, 0)?, 1)?;
    let a3 = bloch_angle(&ramsey_state(p, d, 0, 0)?, 0)?;
    let a4 = bloch_angle(&ramsey_state(p, d, 0, 1)?, 0)?;
    Ok([a1, a2, a3, a4])
}

/// Nearest-continuation unwrap; also reports whether any step came within
/// `margin` of the ±π ambiguity.
pub fn unwrap_phases(values: &[f64], margin: f64) -> (Vec<f64>, bool) {
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    let mut ambiguous = false;
    for &v in values {
        match out.last() {
            None => out.push(wrap_angle(v)),
            Some(&prev) => {
                let step = wrap_angle(v - prev);
                if step.abs() > PI - margin {
                    ambiguous = true;
                }
                out.push(prev + step);
            }
        }
    }
    (out, ambiguous)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSumsResult {
    pub depths: Vec<usize>,
    /// Unwrapped `α₁ + α₂` per depth.
    pub sums: Vec<f64>,
    /// Unwrapped `α₄ − α₃` per depth.
    pub differences: Vec<f64>,
    pub delta_plus: CalibrationFit,
    /// `φ`, identifiable modulo 2π; reported in `(−π, π]`.
    pub phi: CalibrationFit,
}

/// The four `Δ₊`/`φ` sequences over a grid of depths, unwrapped and fitted
/// with straight lines.
pub fn simulate_phase_sums(p: &FsimParams, depths: &[usize]) -> Result<PhaseSumsResult> {
    if depths.len() < 2 {
        return Err(Error::Domain("need at least two depths".into()));
    }
    if depths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("depths must be strictly increasing".into()));
    }
    let mut raw_sums = Vec::with_capacity(depths.len());
    let mut raw_diffs = Vec::with_capacity(depths.len());
    for &d in depths {
        let [a1, a2, a3, a4] = phase_angles(p, d)?;
        raw_sums.push(a1 + a2);
        raw_diffs.push(a4 - a3);
    }
    let margin = 0.1 * PI;
    let (sums, amb_s) = unwrap_phases(&raw_sums, margin);
    let (differences, amb_d) = unwrap_phases(&raw_diffs, margin);
    let xs: Vec<f64> = depths.iter().map(|d| *d as f64).collect();
    let ls = fit_line(&xs, &sums)?;
    let ld = fit_line(&xs, &differences)?;
    let sparse = depths.windows(2).any(|w| w[1] - w[0] > 1);
    Ok(PhaseSumsResult {
        depths: depths.to_vec(),
        sums,
        differences,
        delta_plus: CalibrationFit {
            parameter: "delta_plus".into(),
            estimate: ls.slope / 2.0,
            residual_rms: ls.rms,
            kind: FitKind::Line,
            flagged: amb_s || (sparse && ls.rms > 1e-6),
        },
        phi: CalibrationFit {
            parameter: "phi".into(),
            estimate: wrap_angle(-ld.slope),
            residual_rms: ld.rms,
            kind: FitKind::Line,
            flagged: amb_d || (sparse && ld.rms > 1e-6),
        },
    })
}

/// `R_π(χ) = −i(cos χ X + sin χ Y)`.
fn r_pi(chi: f64) -> Mat2 {
    r_equatorial(PI, chi)
}

/// `P₁` of qubit b after `d` cycles of FSIM, `R_π(−ψ)` on a and
/// `R_π(ψ + π/2)` on b, starting from `|10⟩`.
pub fn theta_p1(p: &FsimParams, d: usize, psi: f64) -> Result<f64> {
    let mut s = make_bitstring_state(&[1, 0])?;
    let m = fsim4(p);
    let (ra, rb) = (r_pi(-psi), r_pi(psi + PI / 2.0));
    for _ in 0..d {
        s.apply_mat4(0, 1, &m);
        s.apply_mat2(0, &ra);
        s.apply_mat2(1, &rb);
    }
    Ok(0.5 * (1.0 - s.expect_z(1)?))
}

/// Exact peak-to-peak law `cos²θ − cos²(dθ)`.
pub fn theta_amplitude(theta: f64, d: usize) -> f64 {
    theta.cos().powi(2) - (d as f64 * theta).cos().powi(2)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 { (x1, f1) } else { (x2, f2) }
}

/// Largest `θ` on the first monotone branch of [`theta_amplitude`], i.e.
/// where the amplitude peaks (just below `π/(2d)`).
pub fn theta_branch_end(d: usize) -> (f64, f64) {
    let top = PI / (d as f64 - 1.0).max(1.0);
    golden_max(|t| theta_amplitude(t, d), 0.0, top.min(PI / 2.0), 200)
}

/// Inverts [`theta_amplitude`] on `θ ∈ [0, branch end]`; `flagged` when the
/// amplitude is at the branch maximum or outside the invertible range.
pub fn invert_theta_amplitude(amplitude: f64, d: usize) -> (f64, bool) {
    let (t_end, a_end) = theta_branch_end(d);
    if amplitude <= 0.0 {
        return (0.0, amplitude < -1e-9);
    }
    if amplitude >= a_end {
        return (t_end, true);
    }
    let (mut lo, mut hi) = (0.0, t_end);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theta_amplitude(mid, d) < amplitude {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    (theta, a_end - amplitude < 1e-3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaResult {
    pub psi_grid: Vec<f64>,
    pub curve: Vec<f64>,
    /// Fundamental `B₀ + B₁ cos(4ψ + ψ₀)` of the sampled curve.
    pub fundamental: CosineFit,
    /// `P₁` at the higher of the two symmetry points.
    pub p1_peak: f64,
    /// `P₁` at the other symmetry point, a quarter period away.
    pub p1_opposite: f64,
    pub peak_to_peak: f64,
    pub fit: CalibrationFit,
}

/// Samples `P₁(ψ)` on `psi_grid` and fits its fundamental in `4ψ`.
///
/// Within the one-excitation block a cycle is a 2×2 unitary whose trace is
/// `∝ sin θ cos(2ψ + c)`, so `P₁ = cos²θ sin²(dω)/sin²ω` with
/// `cos ω ∝ sin θ cos(2ψ + c)`. The curve is even about the points where
/// `cos(2ψ + c)` is 0 or ±1, which the fundamental's phase locates exactly;
/// there `P₁` equals `cos²θ` and `cos²(dθ)`. Their difference is inverted
/// for `θ`. For `dθ ≤ π/2` these are the maximum and minimum of the curve.
pub fn simulate_theta(p: &FsimParams, d: usize, psi_grid: &[f64]) -> Result<ThetaResult> {
    if d % 2 == 0 {
        return Err(Error::Domain("the θ sequence needs an odd depth".into()));
    }
    let curve: Vec<f64> = psi_grid.iter().map(|psi| theta_p1(p, d, *psi)).collect::<Result<_>>()?;
    let four: Vec<f64> = psi_grid.iter().map(|x| 4.0 * x).collect();
    let fundamental = fit_cosine(&four, &curve)?;
    let psi_a = -fundamental.xi0 / 4.0;
    let pa = theta_p1(p, d, psi_a)?;
    let pb = theta_p1(p, d, psi_a + PI / 4.0)?;
    let (p1_peak, p1_opposite) = if pa >= pb { (pa, pb) } else { (pb, pa) };
    let mut peak_to_peak = p1_peak - p1_opposite;
    // A structured curve with no fundamental leaves the symmetry points
    // undetermined.
    let spread = curve.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - curve.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut flagged = fundamental.b1 < 1e-9 && spread > 1e-9;
    if peak_to_peak > 1.0 {
        peak_to_peak = 1.0;
        flagged = true;
    }
    let (theta, edge) = invert_theta_amplitude(peak_to_peak, d);
    let rms = (curve.iter().zip(&four).map(|(y, x)| (y - fundamental.eval(*x)).powi(2)).sum::<f64>()
        / curve.len() as f64)
        .sqrt();
    Ok(ThetaResult {
        psi_grid: psi_grid.to_vec(),
        curve,
        fundamental,
        p1_peak,
        p1_opposite,
        peak_to_peak,
        fit: CalibrationFit { parameter: "theta".into(), estimate: theta, residual_rms: rms, kind: FitKind::Sinusoid, flagged: flagged || edge },
    })
}

/// Depths and grids for a full calibration round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPlan {
    pub delta_minus_depth: usize,
    pub xi_points: usize,
    pub phase_depths: Vec<usize>,
    pub theta_depth: usize,
    pub psi_points: usize,
}

impl Default for CalibrationPlan {
    fn default() -> Self {
        CalibrationPlan { delta_minus_depth: 8, xi_points: 24, phase_depths: (2..=10).collect(), theta_depth: 9, psi_points: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub truth: FsimParams,
    pub theta: CalibrationFit,
    /// `Δ₋` from the phase difference alone.
    pub delta_minus_plain: CalibrationFit,
    /// `Δ₋` with the iSWAP leakage removed using the calibrated `θ`.
    pub delta_minus: CalibrationFit,
    pub delta_plus: CalibrationFit,
    pub phi: CalibrationFit,
}

/// Gate parameters in the range the round-trip suite covers: small `θ`,
/// small `Δ±`, any `Δ₋,off`, and `|φ| ∈ [0.1, 1.5π)` with either sign.
pub fn random_fsim_params<R: Rng + ?Sized>(rng: &mut R) -> FsimParams {
    let phi = rng.random_range(0.1..1.5 * PI);
    FsimParams {
        theta: rng.random_range(0.0..0.1),
        delta_plus: rng.random_range(-0.15..0.15),
        delta_minus: rng.random_range(-0.15..0.15),
        delta_minus_off: rng.random_range(-PI..PI),
        phi: if rng.random::<bool>() { phi } else { -phi },
    }
}

pub fn uniform_grid(n: usize, span: f64) -> Vec<f64> {
    (0..n).map(|k| span * k as f64 / n as f64).collect()
}

/// Runs the θ, Δ₋ and Δ₊/φ sequences and fits.
pub fn calibrate(p: &FsimParams, plan: &CalibrationPlan) -> Result<CalibrationReport> {
    let theta = simulate_theta(p, plan.theta_depth, &uniform_grid(plan.psi_points, PI / 2.0))?.fit;
    let dm = simulate_delta_minus(p, plan.delta_minus_depth, &uniform_grid(plan.xi_points, 2.0 * PI))?;
    let plain = dm.fit.clone();
    let delta_minus = match correct_delta_minus(plain.estimate, theta.estimate, plan.delta_minus_depth) {
        Some(v) => CalibrationFit { estimate: v, ..plain.clone() },
        None => CalibrationFit { flagged: true, ..plain.clone() },
    };
    let ps = simulate_phase_sums(p, &plan.phase_depths)?;
    Ok(CalibrationReport { truth: *p, theta, delta_minus_plain: plain, delta_minus, delta_plus: ps.delta_plus, phi: ps.phi })
}
