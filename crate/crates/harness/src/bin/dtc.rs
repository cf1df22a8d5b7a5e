// dtc: run drive protocols over seeded disorder ensembles and analyze the
// resulting JSONL files.
//
//   dtc chisg --length 8,12 --g-grid 0.78:0.94:0.02 --cycles 60 --t-window 50,60 --instances 100 --out chi.jsonl
//   dtc analyze crossing --input chi.jsonl --csv chi.csv
//
// Exit codes: 0 success, 1 some instances failed (or analysis failed),
// 2 invalid configuration or inputs.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use dtc_core::noise::NoisePlacement;
use dtc_harness::analysis::{
    abar_magnitudes, chi_curves, crossing_estimate, energy_scatter, mean_and_stderr, write_crossing_csv,
    write_histogram_csv, write_scatter_csv, write_zeta_csv, zeta_profile, HistogramStats,
};
use dtc_harness::config::{parse_grid, parse_usize_list, GridSpec};
use dtc_harness::manifest::load_verified;
use dtc_harness::row::ResultRow;
use dtc_harness::{run_ensemble, BitstringPolicy, ConfigLayer, HarnessError, Protocol, RunConfig};

#[derive(Parser)]
#[command(name = "dtc", version, about = "Disordered kicked-Ising drive: ensemble runs and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Site-averaged autocorrelator of bitstring initial states.
    Autocorr(RunArgs),
    /// Echo normalization, noiseless or with depolarizing noise.
    Echo(RunArgs),
    /// Ancilla readout of scrambled initial states.
    Typicality(RunArgs),
    /// Relative polarization change after a single bit flip.
    Perturb(RunArgs),
    /// Spin-glass order parameter averaged over a cycle window.
    Chisg(RunArgs),
    /// Effective-Hamiltonian energies of the initial bitstrings.
    HeffEnergy(RunArgs),
    /// Simulated FSIM calibration of random gate parameters.
    CalibrateSim(RunArgs),
    /// Statistics of existing result files.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Placement {
    After2q,
    Symmetric,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Chain length or comma-separated lengths.
    #[arg(long)]
    length: Option<String>,
    #[arg(long)]
    g: Option<f64>,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    g_grid: Option<String>,
    #[arg(long)]
    cycles: Option<usize>,
    /// Inclusive cycle window `start,end`.
    #[arg(long)]
    t_window: Option<String>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise_p: Option<f64>,
    #[arg(long, value_enum)]
    noise_placement: Option<Placement>,
    /// Comma-separated scrambler depths.
    #[arg(long)]
    scrambler_depth: Option<String>,
    /// hex literal, polarized, neel, random or all.
    #[arg(long)]
    bitstring: Option<String>,
    #[arg(long)]
    n_bitstrings: Option<usize>,
    /// Use the same random bitstrings for every instance.
    #[arg(long)]
    shared_bitstrings: bool,
    /// Uniform coupling instead of disordered couplings.
    #[arg(long, allow_hyphen_values = true)]
    phi_bar: Option<f64>,
    #[arg(long)]
    qubit: Option<usize>,
    #[arg(long)]
    flip_at: Option<usize>,
    /// Worker threads (0: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalysisKind {
    Jackknife,
    Histogram,
    Crossing,
    Scatter,
    Zeta,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(value_enum)]
    kind: AnalysisKind,
    /// Result files; each needs its manifest next to it.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Energy rows for `scatter`.
    #[arg(long)]
    energy: Option<PathBuf>,
    /// Row name to analyze (`jackknife`, `histogram`).
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Plot-data CSV output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn config_error(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl RunArgs {
    fn layer(&self, protocol: Protocol) -> Result<ConfigLayer, HarnessError> {
        let window = match &self.t_window {
            Some(s) => match parse_usize_list(s)?.as_slice() {
                [a, b] => Some([*a, *b]),
                _ => return Err(config_error("t-window takes two cycles: start,end")),
            },
            None => None,
        };
        Ok(ConfigLayer {
            protocol: Some(protocol),
            length: self.length.as_deref().map(parse_usize_list).transpose()?,
            g: self.g,
            g_grid: self.g_grid.as_deref().map(|s| parse_grid(s).map(GridSpec::List)).transpose()?,
            cycles: self.cycles,
            t_window: window,
            instances: self.instances,
            seed: self.seed,
            noise_p: self.noise_p,
            noise_placement: self.noise_placement.map(|p| match p {
                Placement::After2q => NoisePlacement::AfterTwoQubitGates,
                Placement::Symmetric => NoisePlacement::SymmetricPerCycle,
            }),
            bitstring: self.bitstring.as_deref().map(str::parse::<BitstringPolicy>).transpose()?,
            n_bitstrings: self.n_bitstrings,
            shared_bitstrings: self.shared_bitstrings.then_some(true),
            phi_bar: self.phi_bar,
            scrambler_depth: self.scrambler_depth.as_deref().map(parse_usize_list).transpose()?,
            qubit: self.qubit,
            flip_at: self.flip_at,
            workers: self.workers,
            out: self.out.clone(),
            ..Default::default()
        })
    }

    fn resolve(&self, protocol: Protocol) -> Result<RunConfig, HarnessError> {
        let file = match &self.config {
            Some(p) => ConfigLayer::from_file(p)?,
            None => ConfigLayer::default(),
        };
        if file.protocol.is_some_and(|p| p != protocol) {
            return Err(config_error(format!("config file is for {}, not {protocol}", file.protocol.unwrap_or(protocol))));
        }
        RunConfig::from_layer(file.overlay(self.layer(protocol)?))
    }
}

fn run(protocol: Protocol, args: &RunArgs) -> ExitCode {
    let cfg = match args.resolve(protocol) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_ensemble(&cfg) {
        Ok(summary) => {
            println!("{} rows -> {}", summary.rows, summary.rows_path.display());
            println!("manifest -> {}", summary.manifest_path.display());
            for f in &summary.failures {
                eprintln!("instance {} (L = {}, seed {}) failed: {}", f.instance, f.l, f.seed, f.error);
            }
            if summary.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ HarnessError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rows = Vec::new();
    for p in paths {
        rows.extend(load_verified(p)?.1);
    }
    Ok(rows)
}

/// Prints to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_json<T: serde::Serialize>(v: &T) -> Result<(), HarnessError> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<(), HarnessError> {
    let rows = load_all(&a.input)?;
    match a.kind {
        AnalysisKind::Jackknife => {
            let name = a.name.as_deref().unwrap_or("chi");
            let mut groups: std::collections::BTreeMap<(usize, u64), Vec<f64>> = Default::default();
            for r in rows.iter().filter(|r| r.name == name) {
                groups.entry((r.l, r.g.to_bits())).or_default().push(r.value);
            }
            let out: Vec<_> = groups
                .into_iter()
                .map(|((l, g), v)| mean_and_stderr(&v).map(|(m, s)| (l, f64::from_bits(g), v.len(), m, s)))
                .collect::<Result<_, _>>()?;
            print_json(&out)
        }
        AnalysisKind::Histogram => {
            let values: Vec<f64> = match &a.name {
                Some(n) => rows.iter().filter(|r| &r.name == n).map(|r| r.value.abs()).collect(),
                None => abar_magnitudes(&rows).into_values().collect(),
            };
            let h = HistogramStats::new(&values, a.bins)?;
            if let Some(p) = &a.csv {
                write_histogram_csv(p, &h)?;
            }
            print_json(&h)
        }
        AnalysisKind::Crossing => {
            let est = crossing_estimate(&chi_curves(&rows)?)?;
            if let Some(p) = &a.csv {
                write_crossing_csv(p, &est)?;
            }
            print_json(&est)
        }
        AnalysisKind::Scatter => {
            let energy_path = a.energy.as_ref().ok_or_else(|| config_error("scatter needs --energy"))?;
            let energy = load_verified(energy_path)?.1;
            let s = energy_scatter(&energy, &rows)?;
            if let Some(p) = &a.csv {
                write_scatter_csv(p, &s)?;
            }
            print_json(&s)
        }
        AnalysisKind::Zeta => {
            let first = rows.first().ok_or_else(|| config_error("no rows"))?;
            let profile = zeta_profile(&rows, first.l, first.g)?;
            if let Some(p) = &a.csv {
                write_zeta_csv(p, &profile)?;
            }
            print_json(&profile)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (protocol, args) = match &cli.command {
        Command::Autocorr(a) => (Protocol::Autocorr, a),
        Command::Echo(a) => (Protocol::Echo, a),
        Command::Typicality(a) => (Protocol::Typicality, a),
        Command::Perturb(a) => (Protocol::Perturb, a),
        Command::Chisg(a) => (Protocol::Chisg, a),
        Command::HeffEnergy(a) => (Protocol::HeffEnergy, a),
        Command::CalibrateSim(a) => (Protocol::CalibrateSim, a),
        Command::Analyze(a) => {
            return match analyze(a) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e @ (HarnessError::Config(_) | HarnessError::Manifest(_))) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    run(protocol, args)
}
