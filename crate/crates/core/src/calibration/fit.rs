//! Linear least-squares fits used by the calibration sequences.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `y = B₀ + B₁ cos(x + ξ₀)` with `B₁ ≥ 0` and `ξ₀ ∈ (−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineFit {
    pub b0: f64,
    pub b1: f64,
    pub xi0: f64,
    pub rms: f64,
}

impl CosineFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.b0 + self.b1 * (x + self.xi0).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a % (2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    } else if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

fn solve_least_squares(design: DMatrix<f64>, ys: &[f64]) -> Result<DVector<f64>> {
    let svd = design.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin <= 1e-10 * smax {
        return Err(Error::Fit("rank-deficient design matrix".into()));
    }
    svd.solve(&DVector::from_column_slice(ys), 0.0).map_err(|e| Error::Fit(e.to_string()))
}

fn rms(residuals: impl Iterator<Item = f64>, n: usize) -> f64 {
    (residuals.map(|r| r * r).sum::<f64>() / n as f64).sqrt()
}

/// Solves `a cos x + b sin x + c` by linear least squares, then converts to
/// amplitude and phase.
pub fn fit_cosine(xs: &[f64], ys: &[f64]) -> Result<CosineFit> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch { context: "fit inputs", expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 3 {
        return Err(Error::Fit("cosine fit needs at least three points".into()));
    }
    let design = DMatrix::from_fn(xs.len(), 3, |r, c| match c {
        0 => xs[r].cos(),
        1 => xs[r].sin(),
        _ => 1.0,
    });
    let sol = solve_least_squares(design, ys)?;
    let (a, b, c) = (sol[0], sol[1], sol[2]);
    let b1 = a.hypot(b);
    let xi0 = if b1 == 0.0 { 0.0 } else { wrap_angle((-b).atan2(a)) };
    let mut fit = CosineFit { b0: c, b1, xi0, rms: 0.0 };
    fit.rms = rms(xs.iter().zip(ys).map(|(x, y)| y - fit.eval(*x)), xs.len());
    Ok(fit)
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch { context: "fit inputs", expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::Fit("line fit needs at least two points".into()));
    }
    let design = DMatrix::from_fn(xs.len(), 2, |r, c| if c == 0 { xs[r] } else { 1.0 });
    let sol = solve_least_squares(design, ys)?;
    let (slope, intercept) = (sol[0], sol[1]);
    let r = rms(xs.iter().zip(ys).map(|(x, y)| y - slope * x - intercept), xs.len());
    Ok(LineFit { slope, intercept, rms: r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cosine_recovered() {
        let xs: Vec<f64> = (0..20).map(|k| k as f64 * 0.31).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.4 + 0.35 * (x - 2.0).cos()).collect();
        let f = fit_cosine(&xs, &ys).unwrap();
        assert!((f.b0 - 0.4).abs() < 1e-10);
        assert!((f.b1 - 0.35).abs() < 1e-10);
        assert!((f.xi0 + 2.0).abs() < 1e-10);
        assert!(f.rms < 1e-12);
    }

    #[test]
    fn constant_and_degenerate() {
        let xs: Vec<f64> = (0..8).map(|k| k as f64).collect();
        let f = fit_cosine(&xs, &[0.25; 8]).unwrap();
        assert!(f.b1 < 1e-12 && (f.b0 - 0.25).abs() < 1e-12);
        assert!(fit_cosine(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
        assert!(fit_cosine(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn line_through_two_points() {
        let f = fit_line(&[0.0, 1.0], &[1.0, 3.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn wrapping() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5) - 0.5).abs() < 1e-15);
    }
}
