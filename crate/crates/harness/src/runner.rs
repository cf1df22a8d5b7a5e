//! Seeded ensemble execution.
//!
//! A job is one disorder instance of one chain length; it runs every `g` of
//! the grid on the same couplings and fields. Job seeds depend only on the
//! master seed, the length and the instance index, and rows are sorted
//! canonically after collection, so the output is independent of the worker
//! count and of scheduling order.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::time::Instant;

use dtc_core::calibration::{calibrate, random_fsim_params, wrap_angle, CalibrationFit, CalibrationPlan};
use dtc_core::floquet::{sample_disorder, uniform_instance, DisorderInstance};
use dtc_core::heff::{heff_disordered, heff_uniform};
use dtc_core::protocols::typicality::scrambled_sample;
use dtc_core::protocols::{
    build_scrambler, run_echo_all, run_perturbation, run_typicality, run_typicality_noisy, spin_glass_chi, z_sign,
    z_trajectory,
};
use dtc_core::rng::{derive_seed, rng_from_seed, substream};
use dtc_core::state::index_to_bits;

use crate::config::{BitstringPolicy, Protocol, RunConfig};
use crate::error::Result;
use crate::manifest::{write_manifest, Manifest};
use crate::row::{canonical_sort, hex_to_bits, write_jsonl, ResultRow};

/// A job that returned an error instead of rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub l: usize,
    pub instance: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutput {
    /// Canonically sorted.
    pub rows: Vec<ResultRow>,
    pub failures: Vec<InstanceFailure>,
}

/// Seed of instance `i` at chain length `l`; shared by every `g` and by
/// every protocol run with the same master seed.
pub fn instance_seed(master: u64, l: usize, i: usize) -> u64 {
    derive_seed(derive_seed(master, l as u64), i as u64)
}

pub fn make_instance(cfg: &RunConfig, l: usize, seed: u64, g: f64) -> Result<DisorderInstance> {
    Ok(match cfg.phi_bar {
        Some(phi) => uniform_instance(l, g, phi, seed)?,
        None => sample_disorder(l, g, seed)?,
    })
}

/// `n` random bitstrings of length `l` drawn from `seed`.
pub fn random_bitstrings(l: usize, n: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = rng_from_seed(substream(seed, "bits"));
    (0..n).map(|_| (0..l).map(|_| rng.random_range(0..=1u8)).collect()).collect()
}

/// Initial bitstrings of instance `seed` at length `l`.
pub fn bitstrings(cfg: &RunConfig, l: usize, seed: u64) -> Result<Vec<Vec<u8>>> {
    Ok(match &cfg.bitstring {
        BitstringPolicy::Hex(h) => vec![hex_to_bits(h, l)?],
        BitstringPolicy::Polarized => vec![vec![0; l]],
        BitstringPolicy::Neel => vec![(0..l).map(|q| (q % 2) as u8).collect()],
        BitstringPolicy::Random => {
            let source = if cfg.shared_bitstrings { derive_seed(cfg.seed, l as u64) } else { seed };
            random_bitstrings(l, cfg.n_bitstrings, source)
        }
        BitstringPolicy::All => (0..1usize << l).map(|k| index_to_bits(k, l)).collect(),
    })
}

fn window_cycles(cfg: &RunConfig) -> std::ops::RangeInclusive<usize> {
    let (a, b) = cfg.window();
    a..=b
}

fn autocorr_rows(cfg: &RunConfig, inst: &DisorderInstance, bits: &[u8], rows: &mut Vec<ResultRow>) -> Result<()> {
    let l = inst.l;
    let traj = z_trajectory(inst, bits, cfg.cycles)?;
    let interior: Vec<usize> = if l > 2 { (1..l - 1).collect() } else { (0..l).collect() };
    let base = ResultRow::new(cfg.protocol.name(), inst.seed, l, inst.g, "", 0.0).bits(bits);
    for t in window_cycles(cfg) {
        let a = |q: usize| z_sign(bits[q]) * traj[t][q];
        let abar = interior.iter().map(|q| a(*q)).sum::<f64>() / interior.len() as f64;
        rows.push(ResultRow { name: "abar".into(), value: abar, ..base.clone() }.cycle(t));
        if let Some(q) = cfg.qubit {
            rows.push(ResultRow { name: "a".into(), value: a(q), ..base.clone() }.qubit(q).cycle(t));
        }
    }
    Ok(())
}

fn echo_rows(cfg: &RunConfig, inst: &DisorderInstance, bits: &[u8], rows: &mut Vec<ResultRow>) -> Result<()> {
    let noise = cfg.noise();
    let results = run_echo_all(inst, bits, cfg.cycles, noise.as_ref())?;
    let base = ResultRow::new(cfg.protocol.name(), inst.seed, inst.l, inst.g, "a0-squared", 0.0).bits(bits).cycle(cfg.cycles);
    for (q, r) in results.iter().enumerate() {
        if cfg.qubit.is_some_and(|sel| sel != q) {
            continue;
        }
        rows.push(ResultRow { value: r.squared, ..base.clone() }.qubit(q).aux("flagged", f64::from(u8::from(r.flagged))));
    }
    Ok(())
}

fn typicality_rows(cfg: &RunConfig, inst: &DisorderInstance, rows: &mut Vec<ResultRow>) -> Result<()> {
    let l = inst.l;
    let qubit = cfg.qubit.unwrap_or(l / 2);
    let tseed = substream(inst.seed, "typicality");
    let fixed = match cfg.bitstring {
        BitstringPolicy::Random => None,
        _ => Some(bitstrings(cfg, l, inst.seed)?),
    };
    let (t0, t1) = match cfg.t_window {
        Some([a, b]) => (a, b),
        None => (cfg.cycles, cfg.cycles),
    };
    let noise = cfg.noise();
    for &k in &cfg.scrambler_depth {
        let count = fixed.as_ref().map_or(cfg.n_bitstrings, Vec::len);
        for j in 0..count {
            let (bits, scr) = match &fixed {
                None => scrambled_sample(l, k, tseed, j)?,
                Some(list) => (list[j].clone(), build_scrambler(l, k, derive_seed(tseed, j as u64))?),
            };
            for t in t0..=t1 {
                let x = match &noise {
                    None => run_typicality(inst, &scr, &bits, qubit, t)?,
                    Some(model) => run_typicality_noisy(inst, &scr, &bits, qubit, t, model)?,
                };
                rows.push(
                    ResultRow::new(cfg.protocol.name(), inst.seed, l, inst.g, "ancilla-x", x)
                        .bits(&bits)
                        .qubit(qubit)
                        .cycle(t)
                        .aux("k", k as f64)
                        .aux("sample", j as f64),
                );
            }
        }
    }
    Ok(())
}

fn perturb_rows(cfg: &RunConfig, inst: &DisorderInstance, bits: &[u8], rows: &mut Vec<ResultRow>) -> Result<()> {
    let l = inst.l;
    let flip = cfg.flip_at.unwrap_or(l / 2);
    let field = run_perturbation(inst, bits, flip, cfg.cycles)?;
    let base = ResultRow::new(cfg.protocol.name(), inst.seed, l, inst.g, "", 0.0).bits(bits).aux("flip-at", flip as f64);
    let (a, b) = cfg.window();
    let mean = field.window_mean(a, b)?;
    for q in 0..l {
        let dist = q.abs_diff(flip) as f64;
        rows.push(
            ResultRow { name: "zeta-window".into(), value: mean[q], ..base.clone() }
                .qubit(q)
                .cycle(b)
                .aux("t-start", a as f64)
                .aux("distance", dist),
        );
        for (w, win) in field.windows.iter().enumerate() {
            let end = dtc_core::protocols::perturb::WINDOW * (w + 1);
            rows.push(ResultRow { name: "zeta".into(), value: win[q], ..base.clone() }.qubit(q).cycle(end).aux("distance", dist));
        }
    }
    Ok(())
}

fn chisg_rows(cfg: &RunConfig, inst: &DisorderInstance, bits: &[u8], rows: &mut Vec<ResultRow>) -> Result<()> {
    let (a, b) = cfg.window();
    let noise = cfg.noise();
    let r = spin_glass_chi(inst, bits, (a, b), noise.as_ref(), true)?;
    rows.push(
        ResultRow::new(cfg.protocol.name(), inst.seed, inst.l, inst.g, "chi", r.chi)
            .bits(bits)
            .cycle(b)
            .aux("t-start", a as f64),
    );
    Ok(())
}

fn heff_rows(cfg: &RunConfig, inst: &DisorderInstance, bits: &[u8], rows: &mut Vec<ResultRow>) -> Result<()> {
    let h = if cfg.phi_bar.is_some() { heff_uniform(inst)? } else { heff_disordered(inst)? };
    let walls = bits.windows(2).filter(|w| w[0] != w[1]).count();
    rows.push(
        ResultRow::new(cfg.protocol.name(), inst.seed, inst.l, inst.g, "energy", h.diagonal_energy(bits))
            .bits(bits)
            .aux("domain-walls", walls as f64),
    );
    Ok(())
}

fn calibration_rows(seed: u64, rows: &mut Vec<ResultRow>) -> Result<()> {
    let p = random_fsim_params(&mut rng_from_seed(substream(seed, "fsim")));
    let report = calibrate(&p, &CalibrationPlan::default())?;
    let entries: [(&str, &CalibrationFit, f64); 5] = [
        ("theta", &report.theta, p.theta),
        ("delta-minus", &report.delta_minus, p.delta_minus),
        ("delta-minus-plain", &report.delta_minus_plain, p.delta_minus),
        ("delta-plus", &report.delta_plus, p.delta_plus),
        ("phi", &report.phi, p.phi),
    ];
    for (name, fit, truth) in entries {
        let error = if name == "phi" { wrap_angle(fit.estimate - truth) } else { fit.estimate - truth };
        rows.push(
            ResultRow::new(Protocol::CalibrateSim.name(), seed, 2, 0.0, name, fit.estimate)
                .aux("truth", truth)
                .aux("error", error)
                .aux("residual-rms", fit.residual_rms)
                .aux("flagged", f64::from(u8::from(fit.flagged))),
        );
    }
    Ok(())
}

/// Every row of one instance.
pub fn run_job(cfg: &RunConfig, l: usize, seed: u64) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    if cfg.protocol == Protocol::CalibrateSim {
        calibration_rows(seed, &mut rows)?;
        return Ok(rows);
    }
    let base = make_instance(cfg, l, seed, cfg.g_grid[0])?;
    let bit_list = if cfg.protocol == Protocol::Typicality { Vec::new() } else { bitstrings(cfg, l, seed)? };
    for &g in &cfg.g_grid {
        let inst = base.with_g(g)?;
        if cfg.protocol == Protocol::Typicality {
            typicality_rows(cfg, &inst, &mut rows)?;
            continue;
        }
        for bits in &bit_list {
            match cfg.protocol {
                Protocol::Autocorr => autocorr_rows(cfg, &inst, bits, &mut rows)?,
                Protocol::Echo => echo_rows(cfg, &inst, bits, &mut rows)?,
                Protocol::Perturb => perturb_rows(cfg, &inst, bits, &mut rows)?,
                Protocol::Chisg => chisg_rows(cfg, &inst, bits, &mut rows)?,
                Protocol::HeffEnergy => heff_rows(cfg, &inst, bits, &mut rows)?,
                Protocol::Typicality | Protocol::CalibrateSim => unreachable!("handled above"),
            }
        }
    }
    Ok(rows)
}

/// `(l, instance index, seed)` of every job.
pub fn jobs(cfg: &RunConfig) -> Vec<(usize, usize, u64)> {
    let lengths: &[usize] = if cfg.protocol == Protocol::CalibrateSim { &[2] } else { &cfg.lengths };
    lengths.iter().flat_map(|&l| (0..cfg.instances).map(move |i| (l, i, instance_seed(cfg.seed, l, i)))).collect()
}

#[cfg(feature = "parallel")]
fn map_jobs<F>(workers: usize, jobs: &[(usize, usize, u64)], f: F) -> Result<Vec<Result<Vec<ResultRow>>>>
where
    F: Fn(usize, u64) -> Result<Vec<ResultRow>> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::error::HarnessError::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|(l, _, seed)| f(*l, *seed)).collect()))
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<F>(_workers: usize, jobs: &[(usize, usize, u64)], f: F) -> Result<Vec<Result<Vec<ResultRow>>>>
where
    F: Fn(usize, u64) -> Result<Vec<ResultRow>>,
{
    Ok(jobs.iter().map(|(l, _, seed)| f(*l, *seed)).collect())
}

/// Runs the ensemble in memory. Failed instances are reported, not fatal.
pub fn execute(cfg: &RunConfig) -> Result<EnsembleOutput> {
    cfg.validate()?;
    let jobs = jobs(cfg);
    let results = map_jobs(cfg.workers, &jobs, |l, seed| run_job(cfg, l, seed))?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((l, instance, seed), r) in jobs.into_iter().zip(results) {
        match r {
            Ok(mut v) => rows.append(&mut v),
            Err(e) => failures.push(InstanceFailure { l, instance, seed, error: e.to_string() }),
        }
    }
    canonical_sort(&mut rows);
    Ok(EnsembleOutput { rows, failures })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub rows_path: PathBuf,
    pub manifest_path: PathBuf,
    pub rows: usize,
    pub failures: Vec<InstanceFailure>,
}

/// Runs the ensemble and writes the sorted rows to `cfg.out` and the
/// manifest next to it.
pub fn run_ensemble(cfg: &RunConfig) -> Result<RunSummary> {
    let start = Instant::now();
    let out = execute(cfg)?;
    if let Some(dir) = cfg.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_jsonl(&cfg.out, &out.rows)?;
    let manifest = Manifest::build(cfg, &cfg.out, out.rows.len(), out.failures.clone(), start.elapsed().as_secs_f64())?;
    let manifest_path = write_manifest(&cfg.out, &manifest)?;
    Ok(RunSummary { rows_path: cfg.out.clone(), manifest_path, rows: out.rows.len(), failures: out.failures })
}
