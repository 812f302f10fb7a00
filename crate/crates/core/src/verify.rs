//! Batched property checks behind `stia verify`: alignment, cancellation,
//! decoding, effective-channel rank and scheduler partitions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::FadingProcess;
use crate::error::{Error, Result};
use crate::numerics::{self, DEFAULT_RANK_TOL, SINGULAR_CONDITION_LIMIT};
use crate::precoding::{self, PrecoderSet};
use crate::protocol::{self, RoundChannels, RoundConfig, SymbolBlock};
use crate::rng::{derive_seed, stream_rng};
use crate::scheduler::{account_dof, build_plan_general, build_plan_k3, StiaRound};

pub const ALIGNMENT_TOL: f64 = 1e-9;
pub const DECODE_TOL: f64 = 1e-8;
/// Required fraction of full-rank effective channels.
pub const RANK_PASS_FRACTION: f64 = 0.999;

const MAX_ATTEMPTS: u64 = 64;

/// Deliberate defects for checking that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Build precoders against the negated outdated channels.
    NegateOutdated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub users: Vec<usize>,
    pub rounds: usize,
    pub max_plan_rounds: u64,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            users: vec![3, 4, 5, 6],
            rounds: 1000,
            max_plan_rounds: 50,
            seed: 0,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub users: Option<usize>,
    pub passed: bool,
    pub max_residual: Option<f64>,
    pub resamples: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
}

/// Statistics gathered over many random noise-free rounds for one `K`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoundSweep {
    pub rounds: usize,
    pub resamples: u64,
    pub max_alignment: f64,
    pub max_leakage: f64,
    pub max_decode_error: f64,
    pub decode_failures: usize,
    pub full_rank: usize,
    /// Rank-deficient effective channels that were not flagged by the
    /// condition guard.
    pub unflagged_rank_failures: usize,
    pub symbols_delivered: usize,
    pub slots_used: usize,
}

/// Channels of the first round of the `K`-user plan, drawn with `seed`.
pub fn plan_round_channels(process: &FadingProcess, round: &StiaRound) -> RoundChannels {
    RoundChannels {
        reference_slot: round.reference_slot,
        reference: process.channels_at(round.reference_slot).to_vec(),
        phase_two_slots: round.phase_two_slots.clone(),
        phase_two: round
            .phase_two_slots
            .iter()
            .map(|&s| process.channels_at(s).to_vec())
            .collect(),
    }
}

fn build_precoders(channels: &RoundChannels, fault: Option<Fault>) -> Result<Vec<PrecoderSet>> {
    match fault {
        None => protocol::round_precoders(channels),
        Some(Fault::NegateOutdated) => {
            let negated: Vec<_> = channels
                .reference
                .iter()
                .map(|h| h.scaled(Complex64::new(-1.0, 0.0)))
                .collect();
            channels
                .phase_two
                .iter()
                .zip(&channels.phase_two_slots)
                .map(|(now, &slot)| precoding::build_stia_precoders(now, &negated, slot))
                .collect()
        }
    }
}

/// Signal-level leakage: run the round with user `user` silent and measure
/// what survives cancellation, relative to `||h^(k)[ref]|| * sum_i ||s^(i)||`.
fn signal_leakage(
    user: usize,
    channels: &RoundChannels,
    precoders: &[PrecoderSet],
    symbols: &SymbolBlock,
) -> f64 {
    let silent = symbols.without_user(user);
    let mut rng = stream_rng(0, 0);
    let config = RoundConfig::noise_free();
    let mut rx = vec![protocol::broadcast(
        &channels.reference,
        &protocol::phase_one_transmit(&silent, channels.reference_slot, config.power),
        0.0,
        &mut rng,
    )];
    for (now, set) in channels.phase_two.iter().zip(precoders) {
        rx.push(protocol::broadcast(
            now,
            &protocol::phase_two_transmit(&silent, set, config.power),
            0.0,
            &mut rng,
        ));
    }
    let diffs = protocol::cancel_interference(user, &rx);
    let scale = numerics::norm2_vec(&channels.reference[user - 1].entries)
        * silent.per_user.iter().map(|s| numerics::norm2_vec(s)).sum::<f64>();
    numerics::norm_inf_vec(&diffs) / scale
}

/// Runs `rounds` random noise-free rounds for `users` users.
pub fn sweep_rounds(users: usize, rounds: usize, seed: u64, fault: Option<Fault>) -> Result<RoundSweep> {
    let plan = build_plan_general(users, 1)?;
    let geometry = &plan.stia_rounds[0];
    let mut out = RoundSweep {
        rounds,
        ..RoundSweep::default()
    };

    for index in 0..rounds as u64 {
        let mut attempt = 0;
        let (channels, precoders) = loop {
            if attempt == MAX_ATTEMPTS {
                return Err(Error::Domain(format!(
                    "round {index}: no well-conditioned draw in {MAX_ATTEMPTS} attempts"
                )));
            }
            let process = FadingProcess::new(
                users,
                users - 1,
                plan.delay.coherence(),
                derive_seed(seed, &[users as u64, index, attempt]),
            )?;
            let channels = plan_round_channels(&process, geometry);
            match build_precoders(&channels, fault) {
                Ok(p) => break (channels, p),
                Err(Error::IllConditionedChannel { .. }) => {
                    attempt += 1;
                    out.resamples += 1;
                }
                Err(e) => return Err(e),
            }
        };

        let mut rng = stream_rng(derive_seed(seed, &[users as u64, index]), 1);
        let symbols = SymbolBlock::random_gaussian(users, &mut rng);

        for user in 1..=users {
            out.max_alignment = out
                .max_alignment
                .max(protocol::interference_residual(user, &channels, &precoders));
            out.max_leakage = out
                .max_leakage
                .max(signal_leakage(user, &channels, &precoders, &symbols));
            let eff = protocol::effective_channel(user, &channels, &precoders);
            if numerics::rank_with_tol(&eff.matrix, DEFAULT_RANK_TOL) == users - 1 {
                out.full_rank += 1;
            } else if numerics::condition_estimate(&eff.matrix) <= SINGULAR_CONDITION_LIMIT {
                out.unflagged_rank_failures += 1;
            }
        }

        match protocol::run_stia_round_with(&channels, &precoders, &symbols, RoundConfig::noise_free(), &mut rng) {
            Ok(result) => {
                for (got, want) in result.decoded.per_user.iter().zip(&symbols.per_user) {
                    for (a, b) in got.iter().zip(want) {
                        out.max_decode_error = out.max_decode_error.max((a - b).norm() / b.norm().max(1.0));
                    }
                }
                out.symbols_delivered += result.symbols_delivered;
                out.slots_used += result.slots_used;
            }
            Err(Error::DecodeFailure { .. }) => out.decode_failures += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Checks every plan for `K` in `users` and `n` in `1..=max_rounds`, plus the
/// three-user golden sets and the closed-form DoF.
pub fn check_plans(users: &[usize], max_rounds: u64) -> SuiteReport {
    let mut failures = Vec::new();
    for &k in users {
        for n in 1..=max_rounds {
            match build_plan_general(k, n).and_then(|p| p.validate().map(|_| p)) {
                Ok(plan) if k == 3 => {
                    let literal = build_plan_k3(n).expect("n >= 1");
                    if literal != plan {
                        failures.push(format!("K=3 n={n}: classifier disagrees with closed form"));
                    }
                    let dof = account_dof(&plan).dof;
                    let n = n as i64;
                    if dof != num_rational::Ratio::new(6 * n + 10, 3 * n + 6) {
                        failures.push(format!("K=3 n={n}: dof {dof}"));
                    }
                }
                Ok(_) => {}
                Err(e) => failures.push(format!("K={k} n={n}: {e}")),
            }
        }
    }
    let golden = build_plan_k3(3).expect("n = 3");
    let sets: Vec<Vec<u64>> = golden.stia_rounds.iter().map(StiaRound::slots).collect();
    if sets != vec![vec![1, 6, 8], vec![4, 9, 11], vec![7, 12, 14]] {
        failures.push(format!("K=3 n=3 index sets {sets:?}"));
    }
    SuiteReport {
        name: "scheduler_partition".into(),
        users: None,
        passed: failures.is_empty(),
        max_residual: None,
        resamples: 0,
        detail: if failures.is_empty() {
            format!("all plans valid for K in {users:?}, n in 1..={max_rounds}; n=3 sets {sets:?}")
        } else {
            failures.join("; ")
        },
    }
}

pub fn run(options: &VerifyOptions) -> Result<VerifyReport> {
    let mut suites = Vec::new();
    for &k in &options.users {
        let sweep = sweep_rounds(k, options.rounds, options.seed, options.fault)?;
        let needed = (RANK_PASS_FRACTION * (sweep.rounds * k) as f64).ceil() as usize;
        suites.push(SuiteReport {
            name: "alignment".into(),
            users: Some(k),
            passed: sweep.max_alignment <= ALIGNMENT_TOL && sweep.max_leakage <= ALIGNMENT_TOL,
            max_residual: Some(sweep.max_alignment.max(sweep.max_leakage)),
            resamples: sweep.resamples,
            detail: format!(
                "coefficient residual {:.3e}, signal leakage {:.3e}",
                sweep.max_alignment, sweep.max_leakage
            ),
        });
        suites.push(SuiteReport {
            name: "decoding".into(),
            users: Some(k),
            passed: sweep.decode_failures == 0
                && sweep.max_decode_error <= DECODE_TOL
                && sweep.symbols_delivered == sweep.rounds * k * (k - 1)
                && sweep.slots_used == sweep.rounds * k,
            max_residual: Some(sweep.max_decode_error),
            resamples: sweep.resamples,
            detail: format!(
                "{} symbols in {} slots, {} decode failures",
                sweep.symbols_delivered, sweep.slots_used, sweep.decode_failures
            ),
        });
        suites.push(SuiteReport {
            name: "rank".into(),
            users: Some(k),
            passed: sweep.full_rank >= needed && sweep.unflagged_rank_failures == 0,
            max_residual: None,
            resamples: sweep.resamples,
            detail: format!(
                "{}/{} effective channels full rank, {} unflagged failures",
                sweep.full_rank,
                sweep.rounds * k,
                sweep.unflagged_rank_failures
            ),
        });
    }
    suites.push(check_plans(&options.users, options.max_plan_rounds));
    Ok(VerifyReport {
        passed: suites.iter().all(|s| s.passed),
        seed: options.seed,
        suites,
    })
}
