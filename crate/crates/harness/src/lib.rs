//! Ensemble runs of the drive protocols and their statistics.
//!
//! * [`config`]: run configuration merged from defaults, TOML and flags.
//! * [`runner`]: seeded instance jobs on a worker pool.
//! * [`row`], [`manifest`]: JSON-lines results and their manifests.
//! * [`analysis`]: jackknife, histograms, finite-size crossings, energy
//!   scatter and CSV emitters.

pub mod analysis;
pub mod config;
pub mod error;
pub mod manifest;
pub mod row;
pub mod runner;

pub use config::{BitstringPolicy, ConfigLayer, Protocol, RunConfig};
pub use error::{HarnessError, Result};
pub use row::ResultRow;
pub use runner::{execute, run_ensemble, EnsembleOutput, InstanceFailure};
