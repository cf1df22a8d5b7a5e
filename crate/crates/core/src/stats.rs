//! Sample statistics shared by protocols and analysis.

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard deviation with the `1/n` convention.
pub fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Standard deviation with the `1/(n−1)` convention.
pub fn sample_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// Leave-one-out jackknife of an arbitrary estimator: returns the full-sample
/// estimate and the jackknife standard error.
pub fn jackknife<F>(samples: &[f64], estimator: F) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    let n = samples.len();
    if n < 2 {
        return Err(Error::Domain(format!("jackknife needs at least 2 samples, got {n}")));
    }
    let full = estimator(samples);
    let mut buf = Vec::with_capacity(n - 1);
    let loo: Vec<f64> = (0..n)
        .map(|i| {
            buf.clear();
            buf.extend(samples.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x));
            estimator(&buf)
        })
        .collect();
    // Deviations are taken from a shifted mean so that identical
    // leave-one-out values give exactly zero spread.
    let shift = loo[0];
    let loo_mean = shift + loo.iter().map(|x| x - shift).sum::<f64>() / n as f64;
    let var = (n as f64 - 1.0) / n as f64 * loo.iter().map(|x| (x - loo_mean).powi(2)).sum::<f64>();
    Ok((full, var.sqrt()))
}

/// Jackknife of the sample mean.
pub fn jackknife_mean(samples: &[f64]) -> Result<(f64, f64)> {
    jackknife(samples, mean)
}

/// Ordinary least-squares line `y = slope·x + intercept`; also returns the
/// standard error of the slope (0 for two points).
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::SizeMismatch { context: "regression inputs", expected: n, got: ys.len() });
    }
    if n < 2 {
        return Err(Error::Fit("line fit needs at least two points".into()));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if n > 2 {
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
        (rss / (n as f64 - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, intercept, se))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jackknife_small_cases() {
        assert_eq!(jackknife_mean(&[2.0, 2.0, 2.0]).unwrap(), (2.0, 0.0));
        let (e, s) = jackknife_mean(&[0.0, 1.0]).unwrap();
        assert!((e - 0.5).abs() < 1e-15 && (s - 0.5).abs() < 1e-15);
        assert!(jackknife_mean(&[1.0]).is_err());
    }

    #[test]
    fn conventions() {
        assert_eq!(population_std(&[1.0, 3.0]), 1.0);
        assert!((sample_std(&[1.0, 3.0]) - 2f64.sqrt()).abs() < 1e-15);
        let (m, b, _) = linear_regression(&[0.0, 1.0], &[1.0, 3.0]).unwrap();
        assert!((m - 2.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
    }
}
