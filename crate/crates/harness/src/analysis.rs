//! Post-run statistics. Every function here is pure; file handling lives
//! in the CSV emitters at the bottom.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use std::collections::BTreeMap;
use std::path::Path;

pub use dtc_core::stats::{jackknife, jackknife_mean, linear_regression, mean, population_std, sample_std};

use crate::error::{HarnessError, Result};
use crate::row::ResultRow;

fn analysis_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Analysis(msg.into()))
}

/// Jackknife mean that tolerates a single sample (stderr 0).
pub fn mean_and_stderr(xs: &[f64]) -> Result<(f64, f64)> {
    match xs.len() {
        0 => analysis_err("no samples"),
        1 => Ok((xs[0], 0.0)),
        _ => Ok(jackknife_mean(xs)?),
    }
}

/// Spread of a sample set. `std` is the population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramStats {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    /// `σ/|μ|`; 0 when `σ = 0`.
    pub ratio: f64,
    /// `bins + 1` edges spanning `[min, max]`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl HistogramStats {
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() {
            return analysis_err("histogram of an empty sample");
        }
        if bins == 0 {
            return analysis_err("histogram needs at least one bin");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return analysis_err("histogram of non-finite values");
        }
        let m = mean(values);
        let std = population_std(values);
        let ratio = if std == 0.0 { 0.0 } else { std / m.abs() };
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + width * k as f64 }).collect();
        let mut counts = vec![0usize; bins];
        for v in values {
            let k = if width > 0.0 { (((v - lo) / width) as usize).min(bins - 1) } else { 0 };
            counts[k] += 1;
        }
        Ok(HistogramStats { n: values.len(), mean: m, std, ratio, edges, counts })
    }
}

/// `χ^SG(g)` of one chain length with its error bars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiCurve {
    pub l: usize,
    pub g: Vec<f64>,
    pub chi: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Where the larger chain overtakes the smaller one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub l_small: usize,
    pub l_large: usize,
    pub g: f64,
    /// Error of `g` propagated from the two curves' error bars.
    pub delta_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    pub g_grid: Vec<f64>,
    pub curves: Vec<ChiCurve>,
    pub crossings: Vec<PairCrossing>,
    /// `[min(g − δg), max(g + δg)]` over all pairwise crossings, clipped to
    /// the grid; `None` when no pair of curves crosses.
    pub interval: Option<(f64, f64)>,
    /// Mean of the pairwise crossing points.
    pub center: Option<f64>,
}

impl CrossingEstimate {
    pub fn has_crossing(&self) -> bool {
        self.interval.is_some()
    }
}

/// Upward crossings of `d = χ_large − χ_small` on the grid, by linear
/// interpolation between neighbouring grid points.
fn pair_crossings(g: &[f64], d: &[f64], se: &[f64]) -> Vec<(f64, f64)> {
    let n = g.len();
    let mut out = Vec::new();
    for k in 0..n {
        if d[k] == 0.0 {
            let below = k == 0 || d[k - 1] < 0.0;
            let above = k + 1 == n || d[k + 1] > 0.0;
            if below && above && n > 1 {
                let (a, b) = if k == 0 { (0, 1) } else if k + 1 == n { (n - 2, n - 1) } else { (k - 1, k + 1) };
                let slope = (d[b] - d[a]) / (g[b] - g[a]);
                out.push((g[k], if slope > 0.0 { se[k] / slope } else { 0.0 }));
            }
        } else if k + 1 < n && d[k] < 0.0 && d[k + 1] > 0.0 {
            let frac = -d[k] / (d[k + 1] - d[k]);
            let gx = g[k] + frac * (g[k + 1] - g[k]);
            let slope = (d[k + 1] - d[k]) / (g[k + 1] - g[k]);
            let sx = se[k] + frac * (se[k + 1] - se[k]);
            out.push((gx, sx / slope));
        }
    }
    out
}

/// Pairwise finite-size crossings of `χ^SG` curves on a common grid.
pub fn crossing_estimate(curves: &[ChiCurve]) -> Result<CrossingEstimate> {
    if curves.len() < 2 {
        return analysis_err("crossing needs at least two chain lengths");
    }
    let grid = curves[0].g.clone();
    if grid.len() < 2 {
        return analysis_err("crossing needs at least two grid points");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return analysis_err("g grid must be strictly increasing");
    }
    for c in curves {
        if c.g != grid || c.chi.len() != grid.len() || c.stderr.len() != grid.len() {
            return analysis_err(format!("curve for L = {} is not on the common grid", c.l));
        }
    }
    let mut sorted: Vec<&ChiCurve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.l);
    let mut crossings = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            let d: Vec<f64> = b.chi.iter().zip(&a.chi).map(|(x, y)| x - y).collect();
            let se: Vec<f64> = b.stderr.iter().zip(&a.stderr).map(|(x, y)| x.hypot(*y)).collect();
            for (g, dg) in pair_crossings(&grid, &d, &se) {
                crossings.push(PairCrossing { l_small: a.l, l_large: b.l, g, delta_g: dg.abs() });
            }
        }
    }
    let (glo, ghi) = (grid[0], grid[grid.len() - 1]);
    let interval = if crossings.is_empty() {
        None
    } else {
        let lo = crossings.iter().map(|c| c.g - c.delta_g).fold(f64::INFINITY, f64::min).max(glo);
        let hi = crossings.iter().map(|c| c.g + c.delta_g).fold(f64::NEG_INFINITY, f64::max).min(ghi);
        Some((lo, hi))
    };
    let center = (!crossings.is_empty()).then(|| crossings.iter().map(|c| c.g).sum::<f64>() / crossings.len() as f64);
    Ok(CrossingEstimate { g_grid: grid, curves: curves.to_vec(), crossings, interval, center })
}

/// Disorder-averaged `χ^SG(g)` per chain length from `chi` rows. Rows of one
/// instance (several bitstrings) are averaged before the jackknife over
/// instances.
pub fn chi_curves(rows: &[ResultRow]) -> Result<Vec<ChiCurve>> {
    let mut by: BTreeMap<usize, BTreeMap<u64, BTreeMap<u64, Vec<f64>>>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.name == "chi") {
        by.entry(r.l).or_default().entry(r.g.to_bits()).or_default().entry(r.seed).or_default().push(r.value);
    }
    if by.is_empty() {
        return analysis_err("no chi rows");
    }
    let mut curves = Vec::new();
    for (l, per_g) in by {
        let mut pts: Vec<(f64, f64, f64)> = Vec::new();
        for (gbits, per_seed) in per_g {
            let inst: Vec<f64> = per_seed.values().map(|v| mean(v)).collect();
            let (m, s) = mean_and_stderr(&inst)?;
            pts.push((f64::from_bits(gbits), m, s));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        curves.push(ChiCurve {
            l,
            g: pts.iter().map(|p| p.0).collect(),
            chi: pts.iter().map(|p| p.1).collect(),
            stderr: pts.iter().map(|p| p.2).collect(),
        });
    }
    Ok(curves)
}

/// `|[Ā]|` of every bitstring: the instance average of `abar` rows at each
/// cycle, then the mean of its magnitude over the cycles present.
pub fn abar_magnitudes(rows: &[ResultRow]) -> BTreeMap<(usize, u64, String), f64> {
    let mut by: BTreeMap<(usize, u64, String), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.name == "abar") {
        by.entry((r.l, r.g.to_bits(), r.bits.clone())).or_default().entry(r.cycle.unwrap_or(0)).or_default().push(r.value);
    }
    by.into_iter()
        .map(|(k, per_t)| {
            let mags: Vec<f64> = per_t.values().map(|v| mean(v).abs()).collect();
            (k, mean(&mags))
        })
        .collect()
}

/// Mean of a window of width [`ENERGY_WINDOW`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub mean: f64,
}

pub const ENERGY_WINDOW: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyScatter {
    /// `(bits, E_s, |[Ā]|)`.
    pub points: Vec<(String, f64, f64)>,
    pub windows: Vec<EnergyWindow>,
    /// Least-squares slope of the window means against window centres.
    pub window_slope: f64,
    pub window_slope_stderr: f64,
    /// One-way analysis of variance of `|[Ā]|` across energy windows:
    /// the F statistic and its p-value (1 when there is a single window).
    pub anova_f: f64,
    pub anova_p: f64,
}

/// Joins `energy` rows with `abar` rows on `(L, g, bitstring)`; energies are
/// averaged over instances.
pub fn energy_scatter(energy_rows: &[ResultRow], abar_rows: &[ResultRow]) -> Result<EnergyScatter> {
    let mut energies: BTreeMap<(usize, u64, String), Vec<f64>> = BTreeMap::new();
    for r in energy_rows.iter().filter(|r| r.name == "energy") {
        energies.entry((r.l, r.g.to_bits(), r.bits.clone())).or_default().push(r.value);
    }
    let mags = abar_magnitudes(abar_rows);
    if mags.is_empty() {
        return analysis_err("no abar rows to join");
    }
    let mut points = Vec::with_capacity(mags.len());
    for (key, a) in mags {
        let e = energies.get(&key).ok_or_else(|| HarnessError::Analysis(format!("no energy for bitstring {}", key.2)))?;
        points.push((key.2.clone(), mean(e), a));
    }
    let mut bins: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for (_, e, a) in &points {
        bins.entry((e / ENERGY_WINDOW + 1e-9).floor() as i64).or_default().push(*a);
    }
    let windows: Vec<EnergyWindow> = bins
        .iter()
        .map(|(k, v)| EnergyWindow { lo: *k as f64 * ENERGY_WINDOW, hi: (*k + 1) as f64 * ENERGY_WINDOW, n: v.len(), mean: mean(v) })
        .collect();
    let (window_slope, window_slope_stderr) = if windows.len() >= 3 {
        let xs: Vec<f64> = windows.iter().map(|w| 0.5 * (w.lo + w.hi)).collect();
        let ys: Vec<f64> = windows.iter().map(|w| w.mean).collect();
        let (s, _, se) = linear_regression(&xs, &ys)?;
        (s, se)
    } else {
        (0.0, f64::INFINITY)
    };
    let (anova_f, anova_p) = one_way_anova(&bins.into_values().collect::<Vec<_>>());
    Ok(EnergyScatter { points, windows, window_slope, window_slope_stderr, anova_f, anova_p })
}

/// F statistic and p-value of a one-way analysis of variance.
pub fn one_way_anova(groups: &[Vec<f64>]) -> (f64, f64) {
    let k = groups.len();
    let n: usize = groups.iter().map(Vec::len).sum();
    if k < 2 || n <= k {
        return (0.0, 1.0);
    }
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand = mean(&all);
    let between: f64 = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
    let within: f64 = groups.iter().map(|g| {
        let m = mean(g);
        g.iter().map(|x| (x - m).powi(2)).sum::<f64>()
    }).sum();
    let (d1, d2) = ((k - 1) as f64, (n - k) as f64);
    if within == 0.0 {
        return if between > 0.0 { (f64::INFINITY, 0.0) } else { (0.0, 1.0) };
    }
    let f = (between / d1) / (within / d2);
    let p = FisherSnedecor::new(d1, d2).map(|d| 1.0 - d.cdf(f)).unwrap_or(f64::NAN);
    (f, p)
}

/// Instance average of `zeta-window` rows per qubit: `(qubit, distance,
/// mean, stderr)`.
pub fn zeta_profile(rows: &[ResultRow], l: usize, g: f64) -> Result<Vec<(usize, usize, f64, f64)>> {
    let mut by: BTreeMap<usize, (usize, Vec<f64>)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.name == "zeta-window" && r.l == l && r.g == g) {
        let q = r.qubit.ok_or_else(|| HarnessError::Analysis("zeta row without qubit".into()))?;
        let d = r.aux.get("distance").copied().unwrap_or(0.0) as usize;
        by.entry(q).or_insert((d, Vec::new())).1.push(r.value);
    }
    by.into_iter()
        .map(|(q, (d, v))| {
            let (m, s) = mean_and_stderr(&v)?;
            Ok((q, d, m, s))
        })
        .collect()
}

pub fn write_crossing_csv(path: &Path, est: &CrossingEstimate) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["l", "g", "chi", "stderr"])?;
    for c in &est.curves {
        for k in 0..c.g.len() {
            w.write_record([c.l.to_string(), c.g[k].to_string(), c.chi[k].to_string(), c.stderr[k].to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_histogram_csv(path: &Path, h: &HistogramStats) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin_lo", "bin_hi", "count"])?;
    for k in 0..h.counts.len() {
        w.write_record([h.edges[k].to_string(), h.edges[k + 1].to_string(), h.counts[k].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scatter_csv(path: &Path, s: &EnergyScatter) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bits", "energy", "abar_abs"])?;
    for (b, e, a) in &s.points {
        w.write_record([b.clone(), e.to_string(), a.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_zeta_csv(path: &Path, profile: &[(usize, usize, f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["qubit", "distance", "zeta", "stderr"])?;
    for (q, d, m, s) in profile {
        w.write_record([q.to_string(), d.to_string(), m.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
