use std::fs::File;
use std::io::{self, Write};

use anyhow::Context;
use serde::Serialize;
use stia_core::analysis::{emit_tradeoff_table_general, estimate_dof_slope, SimulationSetup};
use stia_core::scheduler::{account_dof, build_plan_general, DofAccount, SchedulerPlan, SlotAssignment, SlotRole};
use stia_core::verify::{self, VerifyOptions, VerifyReport};
use stia_core::{DelayConfig, DofEstimate, Error};

use crate::config::{Command, Format, RunConfig, UsageError};

/// Version of every CSV layout written here.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// What a finished command reports back to `main`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub passed: bool,
    /// Human-readable summary, kept out of the data stream.
    pub summary: String,
}

/// Core errors that stem from the configuration become usage errors.
fn classify(e: Error) -> anyhow::Error {
    match e {
        Error::Domain(_) | Error::Precondition(_) => UsageError(e.to_string()).into(),
        other => other.into(),
    }
}

#[derive(Serialize)]
struct TradeoffRow {
    schema_version: u32,
    scheme: &'static str,
    gamma_num: i64,
    gamma_den: i64,
    dof_num: i64,
    dof_den: i64,
}

#[derive(Serialize)]
struct RateRow {
    schema_version: u32,
    scheme: &'static str,
    k: usize,
    tc: u64,
    tfb: u64,
    snr_db: f64,
    mean_sum_rate: f64,
}

#[derive(Serialize)]
struct SuiteRow<'a> {
    schema_version: u32,
    suite: &'a str,
    k: Option<usize>,
    passed: bool,
    max_residual: Option<f64>,
    resamples: u64,
    detail: &'a str,
}

#[derive(Serialize)]
struct SlotRow {
    schema_version: u32,
    slot: u64,
    role: &'static str,
    round: Option<u64>,
}

#[derive(Serialize)]
struct ScheduleDoc {
    plan: SchedulerPlan,
    assignments: Vec<SlotAssignment>,
    dof: DofAccount,
}

fn json_bytes<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Writes the document to `--out`, or to standard output.
fn emit(config: &RunConfig, bytes: &[u8]) -> anyhow::Result<()> {
    match &config.output_path {
        Some(path) => {
            let mut f = File::create(path).with_context(|| format!("creating {path}"))?;
            f.write_all(bytes).with_context(|| format!("writing {path}"))?;
        }
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

pub fn run(config: &RunConfig) -> anyhow::Result<Outcome> {
    config.validate()?;
    match config.command {
        Command::Simulate => simulate(config),
        Command::Tradeoff => tradeoff(config),
        Command::Verify => run_verify(config),
        Command::Schedule => schedule(config),
    }
}

fn simulate(config: &RunConfig) -> anyhow::Result<Outcome> {
    let setup = SimulationSetup {
        scheme: config.scheme,
        users: config.k,
        delay: DelayConfig::new(config.tc, config.tfb).map_err(classify)?,
        rounds: config.rounds(),
    };
    let est: DofEstimate =
        estimate_dof_slope(&setup, &config.snr_grid_db, config.trials, config.seed).map_err(classify)?;
    let bytes = match config.format() {
        Format::Json => json_bytes(&est)?,
        Format::Csv => csv_bytes(est.snr_grid_db.iter().zip(&est.mean_sum_rates).map(|(&snr_db, &rate)| RateRow {
            schema_version: CSV_SCHEMA_VERSION,
            scheme: est.scheme.as_str(),
            k: est.users,
            tc: est.coherence,
            tfb: est.feedback_delay,
            snr_db,
            mean_sum_rate: rate,
        }))?,
    };
    emit(config, &bytes)?;
    Ok(Outcome {
        passed: true,
        summary: format!(
            "{} K={} gamma={}/{}: slope {:.4} +- {:.4} (95% CI, {} trials, {} resampled draws)",
            est.scheme, est.users, est.gamma_num, est.gamma_den, est.slope, est.confidence_halfwidth, est.trials, est.resamples
        ),
    })
}

fn tradeoff(config: &RunConfig) -> anyhow::Result<Outcome> {
    let gammas = config.gammas();
    let rows = emit_tradeoff_table_general(config.k, &gammas).map_err(classify)?;
    let rows: Vec<TradeoffRow> = rows
        .iter()
        .map(|p| TradeoffRow {
            schema_version: CSV_SCHEMA_VERSION,
            scheme: p.scheme.as_str(),
            gamma_num: *p.gamma.numer(),
            gamma_den: *p.gamma.denom(),
            dof_num: *p.dof.numer(),
            dof_den: *p.dof.denom(),
        })
        .collect();
    let count = rows.len();
    let bytes = match config.format() {
        Format::Json => json_bytes(&rows)?,
        Format::Csv => csv_bytes(rows)?,
    };
    emit(config, &bytes)?;
    Ok(Outcome {
        passed: true,
        summary: format!("{count} rows for K={} over {} gamma values", config.k, gammas.len()),
    })
}

fn run_verify(config: &RunConfig) -> anyhow::Result<Outcome> {
    let options = VerifyOptions {
        users: config.users.clone(),
        rounds: config.rounds() as usize,
        seed: config.seed,
        fault: config.inject_fault,
        ..VerifyOptions::default()
    };
    let report: VerifyReport = verify::run(&options).map_err(classify)?;
    let bytes = match config.format() {
        Format::Json => json_bytes(&report)?,
        Format::Csv => csv_bytes(report.suites.iter().map(|s| SuiteRow {
            schema_version: CSV_SCHEMA_VERSION,
            suite: &s.name,
            k: s.users,
            passed: s.passed,
            max_residual: s.max_residual,
            resamples: s.resamples,
            detail: &s.detail,
        }))?,
    };
    emit(config, &bytes)?;
    let failed: Vec<String> = report
        .suites
        .iter()
        .filter(|s| !s.passed)
        .map(|s| match s.users {
            Some(k) => format!("{} (K={k})", s.name),
            None => s.name.clone(),
        })
        .collect();
    Ok(Outcome {
        passed: report.passed,
        summary: if failed.is_empty() {
            format!("all {} suites passed", report.suites.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    })
}

fn schedule(config: &RunConfig) -> anyhow::Result<Outcome> {
    let plan = build_plan_general(config.k, config.rounds()).map_err(classify)?;
    plan.validate()?;
    let dof = account_dof(&plan);
    let assignments = plan.assignments();
    let bytes = match config.format() {
        Format::Json => json_bytes(&ScheduleDoc {
            plan,
            assignments,
            dof,
        })?,
        Format::Csv => csv_bytes(assignments.iter().map(|a| {
            let (role, round) = match a.role {
                SlotRole::StiaReference { round } => ("stia_reference", Some(round)),
                SlotRole::StiaPhaseTwo { round } => ("stia_phase_two", Some(round)),
                SlotRole::Zf => ("zf", None),
                SlotRole::Tdma => ("tdma", None),
            };
            SlotRow {
                schema_version: CSV_SCHEMA_VERSION,
                slot: a.slot,
                role,
                round,
            }
        }))?,
    };
    emit(config, &bytes)?;
    Ok(Outcome {
        passed: true,
        summary: format!(
            "K={} n={}: {} symbols in {} slots, DoF {}",
            config.k,
            config.rounds(),
            dof.symbols_delivered,
            dof.slots_used,
            dof.dof
        ),
    })
}
