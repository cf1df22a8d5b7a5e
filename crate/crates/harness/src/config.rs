//! Run configuration: defaults, TOML file values and command-line flags are
//! merged in that order into one validated [`RunConfig`].

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dtc_core::density::MAX_DENSITY_QUBITS;
use dtc_core::noise::{NoiseModel, NoisePlacement};
use dtc_core::protocols::MAX_CYCLES;
use dtc_core::state::MAX_STATE_QUBITS;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Autocorr,
    Echo,
    Typicality,
    Perturb,
    Chisg,
    HeffEnergy,
    CalibrateSim,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Autocorr => "autocorr",
            Protocol::Echo => "echo",
            Protocol::Typicality => "typicality",
            Protocol::Perturb => "perturb",
            Protocol::Chisg => "chisg",
            Protocol::HeffEnergy => "heff-energy",
            Protocol::CalibrateSim => "calibrate-sim",
        }
    }

    /// Whether a noisy run of this protocol needs the density-matrix engine.
    fn supports_noise(self) -> bool {
        matches!(self, Protocol::Echo | Protocol::Typicality | Protocol::Chisg)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial bitstrings of every instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BitstringPolicy {
    /// One fixed bitstring given in hex, qubit 0 as the most significant bit.
    Hex(String),
    Polarized,
    Neel,
    /// `n_bitstrings` random bitstrings.
    Random,
    /// Every bitstring of the chain.
    All,
}

impl FromStr for BitstringPolicy {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polarized" => Ok(BitstringPolicy::Polarized),
            "neel" => Ok(BitstringPolicy::Neel),
            "random" => Ok(BitstringPolicy::Random),
            "all" => Ok(BitstringPolicy::All),
            _ => {
                let digits = s.strip_prefix("0x").unwrap_or(s);
                if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_hexdigit()) {
                    Ok(BitstringPolicy::Hex(digits.to_ascii_lowercase()))
                } else {
                    Err(HarnessError::Config(format!(
                        "bitstring must be polarized, neel, random, all or a hex literal, got {s:?}"
                    )))
                }
            }
        }
    }
}

impl TryFrom<String> for BitstringPolicy {
    type Error = HarnessError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BitstringPolicy> for String {
    fn from(p: BitstringPolicy) -> String {
        match p {
            BitstringPolicy::Hex(h) => format!("0x{h}"),
            BitstringPolicy::Polarized => "polarized".into(),
            BitstringPolicy::Neel => "neel".into(),
            BitstringPolicy::Random => "random".into(),
            BitstringPolicy::All => "all".into(),
        }
    }
}

/// A `g` grid written either as a list or as `"start:stop:step"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range(String),
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::List(v) => Ok(v.clone()),
            GridSpec::Range(s) => parse_grid(s),
        }
    }
}

/// `"0.78:0.94:0.02"` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || HarnessError::Config(format!("cannot parse grid {s:?}"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h): (f64, f64, f64) =
                (start.parse().map_err(|_| bad())?, stop.parse().map_err(|_| bad())?, step.parse().map_err(|_| bad())?);
            if h.is_nan() || h <= 0.0 || b < a {
                return Err(bad());
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            // Rounded so that 0.78 + 3·0.02 prints as 0.84.
            Ok((0..=n).map(|i| ((a + i as f64 * h) * 1e10).round() / 1e10).collect())
        }
        [_] => s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect(),
        _ => Err(bad()),
    }
}

/// Comma-separated unsigned integers.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| HarnessError::Config(format!("cannot parse integer list {s:?}"))))
        .collect()
}

/// Every configurable key, all optional. Used both for the TOML file and
/// for the command-line flags; later sources override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigLayer {
    pub protocol: Option<Protocol>,
    pub length: Option<Vec<usize>>,
    pub g: Option<f64>,
    pub g_grid: Option<GridSpec>,
    pub cycles: Option<usize>,
    pub t_window: Option<[usize; 2]>,
    pub instances: Option<usize>,
    pub seed: Option<u64>,
    pub noise_p: Option<f64>,
    pub noise_placement: Option<NoisePlacement>,
    pub bitstring: Option<BitstringPolicy>,
    pub n_bitstrings: Option<usize>,
    pub shared_bitstrings: Option<bool>,
    pub phi_bar: Option<f64>,
    pub scrambler_depth: Option<Vec<usize>>,
    pub qubit: Option<usize>,
    pub flip_at: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub max_state_qubits: Option<usize>,
    pub max_density_qubits: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => { $( if $src.$f.is_some() { $dst.$f = $src.$f; } )* };
}

impl ConfigLayer {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| HarnessError::Config(format!("config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// `self` with every key set in `top` replaced. A scalar `g` and a grid
    /// displace each other.
    pub fn overlay(mut self, top: ConfigLayer) -> ConfigLayer {
        if top.g.is_some() {
            self.g_grid = None;
        }
        if top.g_grid.is_some() {
            self.g = None;
        }
        overlay!(
            self, top, protocol, length, g, g_grid, cycles, t_window, instances, seed, noise_p, noise_placement,
            bitstring, n_bitstrings, shared_bitstrings, phi_bar, scrambler_depth, qubit, flip_at, workers, out,
            max_state_qubits, max_density_qubits
        );
        self
    }
}

/// A complete, validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub protocol: Protocol,
    pub lengths: Vec<usize>,
    pub g_grid: Vec<f64>,
    /// `t_max`: periods simulated per run.
    pub cycles: usize,
    /// Inclusive cycle window for windowed observables; defaults per protocol.
    pub t_window: Option<[usize; 2]>,
    pub instances: usize,
    pub seed: u64,
    pub noise_p: f64,
    pub noise_placement: NoisePlacement,
    pub bitstring: BitstringPolicy,
    pub n_bitstrings: usize,
    /// Draw the random bitstrings once per chain length instead of per
    /// instance, so that each bitstring can be disorder-averaged.
    pub shared_bitstrings: bool,
    /// Uniform coupling `φ̄`; `None` samples disordered couplings.
    pub phi_bar: Option<f64>,
    pub scrambler_depth: Vec<usize>,
    pub qubit: Option<usize>,
    pub flip_at: Option<usize>,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub out: PathBuf,
    pub max_state_qubits: usize,
    pub max_density_qubits: usize,
}

impl RunConfig {
    /// Defaults for everything except the protocol.
    pub fn new(protocol: Protocol) -> Self {
        RunConfig {
            protocol,
            lengths: vec![12],
            g_grid: vec![0.94],
            cycles: 100,
            t_window: None,
            instances: 24,
            seed: 1,
            noise_p: 0.0,
            noise_placement: NoisePlacement::AfterTwoQubitGates,
            bitstring: BitstringPolicy::Random,
            n_bitstrings: 1,
            shared_bitstrings: false,
            phi_bar: None,
            scrambler_depth: vec![0],
            qubit: None,
            flip_at: None,
            workers: 0,
            out: PathBuf::from(format!("{}.jsonl", protocol.name())),
            max_state_qubits: MAX_STATE_QUBITS,
            max_density_qubits: MAX_DENSITY_QUBITS,
        }
    }

    /// Builds and validates a configuration from a merged layer.
    pub fn from_layer(layer: ConfigLayer) -> Result<Self> {
        let protocol = layer.protocol.ok_or_else(|| HarnessError::Config("no protocol given".into()))?;
        let mut c = RunConfig::new(protocol);
        if let Some(v) = layer.length {
            c.lengths = v;
        }
        if let Some(g) = layer.g {
            c.g_grid = vec![g];
        }
        if let Some(grid) = layer.g_grid {
            c.g_grid = grid.values()?;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = layer.$f { c.$f = v; } )* };
        }
        take!(cycles, instances, seed, noise_p, noise_placement, bitstring, n_bitstrings, shared_bitstrings);
        take!(scrambler_depth, workers, out, max_state_qubits, max_density_qubits);
        c.t_window = layer.t_window.or(c.t_window);
        c.phi_bar = layer.phi_bar.or(c.phi_bar);
        c.qubit = layer.qubit.or(c.qubit);
        c.flip_at = layer.flip_at.or(c.flip_at);
        c.validate()?;
        Ok(c)
    }

    pub fn noise(&self) -> Option<NoiseModel> {
        (self.noise_p > 0.0).then_some(NoiseModel { p: self.noise_p, placement: self.noise_placement })
    }

    /// The cycle window of windowed observables.
    pub fn window(&self) -> (usize, usize) {
        match self.t_window {
            Some([a, b]) => (a, b),
            None => match self.protocol {
                Protocol::Chisg | Protocol::Perturb => (self.cycles.saturating_sub(10), self.cycles),
                _ => (0, self.cycles),
            },
        }
    }

    /// Checks everything that can be checked without simulating.
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(HarnessError::Config(m));
        if self.lengths.is_empty() {
            return err("length list is empty".into());
        }
        if self.g_grid.is_empty() {
            return err("g grid is empty".into());
        }
        if let Some(g) = self.g_grid.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return err(format!("g = {g} outside [0, 1]"));
        }
        if self.instances == 0 {
            return err("instance count must be at least 1".into());
        }
        if self.cycles > MAX_CYCLES {
            return err(format!("cycles {} above {MAX_CYCLES}", self.cycles));
        }
        if let Some([a, b]) = self.t_window {
            if a > b || b > self.cycles {
                return err(format!("window [{a}, {b}] not inside 0..={}", self.cycles));
            }
        }
        if !(0.0..=1.0).contains(&self.noise_p) {
            return err(format!("noise p = {} outside [0, 1]", self.noise_p));
        }
        if self.noise_p > 0.0 && !self.protocol.supports_noise() {
            return err(format!("{} has no noisy variant", self.protocol));
        }
        if self.max_state_qubits > MAX_STATE_QUBITS || self.max_density_qubits > MAX_DENSITY_QUBITS {
            return err(format!(
                "qubit limits cannot exceed the engine limits ({MAX_STATE_QUBITS} pure, {MAX_DENSITY_QUBITS} density)"
            ));
        }
        if self.n_bitstrings == 0 {
            return err("n-bitstrings must be at least 1".into());
        }
        if let Some(phi) = self.phi_bar {
            if !phi.is_finite() {
                return err("phi-bar must be finite".into());
            }
        }
        if self.protocol == Protocol::CalibrateSim {
            return Ok(());
        }
        let noisy = self.noise_p > 0.0;
        for &l in &self.lengths {
            let (limit, engine) = if noisy { (self.max_density_qubits, "density-matrix") } else { (self.max_state_qubits, "state-vector") };
            // The typicality ancilla is one extra qubit.
            let extra = usize::from(self.protocol == Protocol::Typicality);
            if l < 2 || l + extra > limit {
                return err(format!("L = {l} outside the {engine} limit 2..={}", limit - extra));
            }
            if self.protocol == Protocol::Chisg && l < 4 {
                return err(format!("chisg needs L ≥ 4, got {l}"));
            }
            if let Some(q) = self.qubit.or(self.flip_at) {
                if q >= l {
                    return err(format!("qubit {q} outside a chain of {l}"));
                }
            }
            match &self.bitstring {
                BitstringPolicy::Hex(h) => {
                    let v = u64::from_str_radix(h, 16).map_err(|_| HarnessError::Config(format!("bad hex {h}")))?;
                    if l < 64 && v >> l != 0 {
                        return err(format!("bitstring 0x{h} does not fit in {l} qubits"));
                    }
                }
                BitstringPolicy::All if l > 12 => return err(format!("exhaustive bitstrings limited to L ≤ 12, got {l}")),
                _ => {}
            }
        }
        if self.protocol == Protocol::Typicality && self.scrambler_depth.is_empty() {
            return err("scrambler depth list is empty".into());
        }
        if self.protocol == Protocol::Chisg && self.window().0 > self.window().1 {
            return err("empty chisg window".into());
        }
        if self.protocol == Protocol::Perturb && self.bitstring == BitstringPolicy::All {
            return err("perturb does not support exhaustive bitstrings".into());
        }
        Ok(())
    }

    /// The configuration with scheduling-only fields cleared; two runs with
    /// equal canonical forms produce identical rows.
    pub fn canonical(&self) -> RunConfig {
        RunConfig { workers: 0, out: PathBuf::new(), ..self.clone() }
    }
}
