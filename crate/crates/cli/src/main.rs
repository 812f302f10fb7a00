use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stia_cli::config::parse_fraction;
use stia_cli::{Command, Format, RunConfig, UsageError};
use stia_core::verify::Fault;
use stia_core::{Fraction, SimScheme};

/// Delayed-CSIT interference alignment simulator.
#[derive(Parser)]
#[command(name = "stia", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Estimate the DoF slope of a scheme by Monte Carlo.
    Simulate(Flags),
    /// Emit the exact delay/DoF trade-off table.
    Tradeoff(Flags),
    /// Run the alignment, decoding, rank and scheduler checks.
    Verify(Flags),
    /// Print the slot plan for K users and --rounds STIA rounds.
    Schedule(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON file with RunConfig fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of users.
    #[arg(long)]
    k: Option<usize>,
    /// Coherence time in slots.
    #[arg(long)]
    tc: Option<u64>,
    /// Feedback delay in slots.
    #[arg(long)]
    tfb: Option<u64>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// stia, zf_tdma, zf or tdma.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<SimScheme>,
    /// STIA rounds per trial (simulate), rounds per K (verify) or plan length (schedule).
    #[arg(long)]
    rounds: Option<u64>,
    /// Comma-separated user counts for verify.
    #[arg(long, value_delimiter = ',')]
    users: Option<Vec<usize>>,
    /// Comma-separated gamma grid for tradeoff, e.g. 0,1/3,1.
    #[arg(long = "gamma", value_delimiter = ',', value_parser = parse_fraction)]
    gammas: Option<Vec<Fraction>>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FaultArg {
    NegateOutdated,
}

fn parse_scheme(s: &str) -> Result<SimScheme, String> {
    s.parse().map_err(|e: stia_core::Error| e.to_string())
}

impl Flags {
    fn into_config(self, command: Command) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        c.command = command;
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { c.$field = v; })*
            };
        }
        set!(k => k, tc => tc, tfb => tfb, snr => snr_grid_db, trials => trials, seed => seed,
             scheme => scheme, users => users);
        if self.rounds.is_some() {
            c.rounds = self.rounds;
        }
        if self.gammas.is_some() {
            c.gammas = self.gammas;
        }
        if self.out.is_some() {
            c.output_path = self.out;
        }
        if self.format.is_some() {
            c.format = self.format;
        }
        if let Some(FaultArg::NegateOutdated) = self.inject_fault {
            c.inject_fault = Some(Fault::NegateOutdated);
        }
        Ok(c)
    }
}

fn thread_pool() -> anyhow::Result<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var("STIA_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| UsageError(format!("STIA_THREADS must be a positive integer, got '{raw}'")))?;
    Ok(Some(rayon::ThreadPoolBuilder::new().num_threads(n).build()?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::Tradeoff(f) => (Command::Tradeoff, f),
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Schedule(f) => (Command::Schedule, f),
    };
    let result = flags.into_config(command).and_then(|config| {
        let outcome = match thread_pool()? {
            Some(pool) => pool.install(|| stia_cli::run(&config)),
            None => stia_cli::run(&config),
        }?;
        Ok((config, outcome))
    });
    match result {
        Ok((config, outcome)) => {
            // Keep stdout clean when it carries the data.
            if config.output_path.is_some() {
                println!("{}", outcome.summary);
            } else {
                eprintln!("{}", outcome.summary);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
