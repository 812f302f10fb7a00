//! Run configuration: built-in defaults, then an optional JSON file, then
//! command-line flags.

use std::fmt;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use stia_core::verify::Fault;
use stia_core::{Fraction, SimScheme};

pub const DEFAULT_SNR_GRID_DB: [f64; 3] = [40.0, 50.0, 60.0];
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 7;
/// STIA rounds (or coherence blocks) per simulated trial.
pub const DEFAULT_SIM_ROUNDS: u64 = 24;
pub const DEFAULT_VERIFY_ROUNDS: u64 = 1000;
pub const DEFAULT_SCHEDULE_ROUNDS: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    #[default]
    Simulate,
    Tradeoff,
    Verify,
    Schedule,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Simulate => "simulate",
            Self::Tradeoff => "tradeoff",
            Self::Verify => "verify",
            Self::Schedule => "schedule",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Invalid user input; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub k: usize,
    pub tc: u64,
    pub tfb: u64,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub scheme: SimScheme,
    /// Per-command default when absent.
    pub rounds: Option<u64>,
    /// User counts exercised by `verify`.
    pub users: Vec<usize>,
    /// Trade-off grid; `0..=3/2` in steps of `1/24` when absent.
    pub gammas: Option<Vec<Fraction>>,
    pub output_path: Option<String>,
    /// CSV for `tradeoff`, JSON otherwise, when absent.
    pub format: Option<Format>,
    pub inject_fault: Option<Fault>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Simulate,
            k: 3,
            tc: 3,
            tfb: 1,
            snr_grid_db: DEFAULT_SNR_GRID_DB.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            scheme: SimScheme::Stia,
            rounds: None,
            users: vec![3, 4, 5, 6],
            gammas: None,
            output_path: None,
            format: None,
            inject_fault: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn rounds(&self) -> u64 {
        self.rounds.unwrap_or(match self.command {
            Command::Verify => DEFAULT_VERIFY_ROUNDS,
            Command::Schedule => DEFAULT_SCHEDULE_ROUNDS,
            Command::Simulate | Command::Tradeoff => DEFAULT_SIM_ROUNDS,
        })
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            Command::Tradeoff => Format::Csv,
            _ => Format::Json,
        })
    }

    pub fn gammas(&self) -> Vec<Fraction> {
        self.gammas
            .clone()
            .unwrap_or_else(|| (0..=36).map(|i| Fraction::new(i, 24)).collect())
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trials < 1 {
            return Err(usage("--trials must be at least 1"));
        }
        if self.tc < 1 {
            return Err(usage("--tc must be at least 1"));
        }
        if self.rounds() < 1 {
            return Err(usage("--rounds must be at least 1"));
        }
        if self.command != Command::Verify && self.k < 3 {
            return Err(usage(format!("--k must be at least 3, got {}", self.k)));
        }
        if self.command == Command::Verify && (self.users.is_empty() || self.users.iter().any(|&k| k < 3)) {
            return Err(usage("--users must list user counts of at least 3"));
        }
        if self.command == Command::Simulate {
            if self.snr_grid_db.is_empty() {
                return Err(usage("--snr needs at least one value"));
            }
            if self.snr_grid_db.iter().any(|x| !x.is_finite()) {
                return Err(usage("--snr values must be finite"));
            }
        }
        if let Some(g) = &self.gammas {
            if g.is_empty() {
                return Err(usage("--gamma needs at least one value"));
            }
        }
        Ok(())
    }
}

pub fn parse_fraction(s: &str) -> Result<Fraction, String> {
    s.trim().parse::<Fraction>().map_err(|e| format!("'{s}' is not a fraction like 1/3: {e}"))
}
