//! Delay/DoF trade-off curves and Monte Carlo DoF-slope estimation.
//!
//! The analytic side works in exact rationals. The Monte Carlo side runs the
//! scheduler and protocol per trial, averages the sum rate over the slot
//! horizon at each SNR point and regresses the mean against `log2(SNR)`.
//! Every SNR point of a trial reuses the same channel draw.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelVector, DelayConfig, FadingProcess};
use crate::error::{Error, Result};
use crate::precoding::tdma_select;
use crate::protocol::{self, RoundChannels};
use crate::rng::{derive_seed, stream_rng};
use crate::scheduler::{build_plan_general, SchedulerPlan};

pub type Fraction = Ratio<i64>;

/// Number of bootstrap resamples behind [`DofEstimate::confidence_halfwidth`].
pub const BOOTSTRAP_RESAMPLES: usize = 400;

/// Smallest trial budget accepted by [`estimate_dof_slope`].
pub const MIN_TRIALS: usize = 1000;

/// Lowest acceptable top of the SNR grid, in dB.
pub const MIN_TOP_SNR_DB: f64 = 40.0;

const MAX_RESAMPLES_PER_TRIAL: u64 = 64;

fn frac(n: i64, d: i64) -> Fraction {
    Ratio::new(n, d)
}

/// DoF of the completely-outdated-CSIT scheme for 3 users and 2 antennas.
pub fn mat_dof_k3() -> Fraction {
    frac(3, 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TradeoffScheme {
    /// STIA with time sharing (the achievable trade-off).
    Stia,
    ZfTdma,
    ZfMat,
    Tdma,
    Mat,
}

impl TradeoffScheme {
    pub const ALL: [TradeoffScheme; 5] = [Self::Stia, Self::ZfTdma, Self::ZfMat, Self::Tdma, Self::Mat];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stia => "stia",
            Self::ZfTdma => "zf_tdma",
            Self::ZfMat => "zf_mat",
            Self::Tdma => "tdma",
            Self::Mat => "mat",
        }
    }
}

impl fmt::Display for TradeoffScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub scheme: TradeoffScheme,
    pub gamma: Fraction,
    pub dof: Fraction,
}

fn check_nonnegative(gamma: Fraction) -> Result<()> {
    if gamma < frac(0, 1) {
        return Err(Error::Domain(format!("gamma must be non-negative, got {gamma}")));
    }
    Ok(())
}

fn check_unit_interval(gamma: Fraction) -> Result<()> {
    if gamma < frac(0, 1) || gamma > frac(1, 1) {
        return Err(Error::Domain(format!("baselines are defined for 0 <= gamma <= 1, got {gamma}")));
    }
    Ok(())
}

/// Achievable sum DoF for 3 users and 2 antennas:
/// 2 up to `gamma = 1/3`, then `9/4 - 3 gamma / 4` up to 1, then 3/2.
pub fn tradeoff_k3(gamma: Fraction) -> Result<Fraction> {
    check_nonnegative(gamma)?;
    Ok(if gamma <= frac(1, 3) {
        frac(2, 1)
    } else if gamma <= frac(1, 1) {
        frac(9, 4) - frac(3, 4) * gamma
    } else {
        mat_dof_k3()
    })
}

/// ZF on current-CSIT slots, TDMA elsewhere: `2 - gamma`.
pub fn baseline_zf_tdma(gamma: Fraction) -> Result<Fraction> {
    check_unit_interval(gamma)?;
    Ok((frac(1, 1) - gamma) * 2 + gamma)
}

/// ZF on current-CSIT slots, the outdated-CSIT scheme elsewhere: `2 - gamma / 2`.
pub fn baseline_zf_mat(gamma: Fraction) -> Result<Fraction> {
    check_unit_interval(gamma)?;
    Ok((frac(1, 1) - gamma) * 2 + gamma * mat_dof_k3())
}

/// Achievable curve for general `K` with `N_t = K - 1`: the plateau `K - 1`
/// for `gamma <= 1/K`, then time sharing with TDMA down to 1 at `gamma = 1`.
/// Three users get the exact curve of [`tradeoff_k3`].
pub fn tradeoff_general(users: usize, gamma: Fraction) -> Result<Fraction> {
    if users < 3 {
        return Err(Error::Domain(format!("need K >= 3, got {users}")));
    }
    if users == 3 {
        return tradeoff_k3(gamma);
    }
    check_nonnegative(gamma)?;
    let k = users as i64;
    let corner = frac(1, k);
    let plateau = frac(k - 1, 1);
    Ok(if gamma <= corner {
        plateau
    } else if gamma <= frac(1, 1) {
        // Line through (1/K, K - 1) and (1, 1).
        let t = (gamma - corner) / (frac(1, 1) - corner);
        plateau - (plateau - frac(1, 1)) * t
    } else {
        frac(1, 1)
    })
}

/// General-`K` ZF/TDMA time sharing: `(1 - gamma)(K - 1) + gamma`.
pub fn baseline_zf_tdma_general(users: usize, gamma: Fraction) -> Result<Fraction> {
    check_unit_interval(gamma)?;
    Ok((frac(1, 1) - gamma) * (users as i64 - 1) + gamma)
}

/// Rows for every scheme at every `gamma` (3 users, 2 antennas). Beyond
/// `gamma = 1` no current CSIT exists, so the baselines keep their
/// `gamma = 1` values there.
pub fn emit_tradeoff_table(gammas: &[Fraction]) -> Result<Vec<TradeoffPoint>> {
    if gammas.is_empty() {
        return Err(Error::Precondition("empty gamma grid".into()));
    }
    let mut rows = Vec::with_capacity(gammas.len() * TradeoffScheme::ALL.len());
    for &gamma in gammas {
        let capped = gamma.min(frac(1, 1));
        for scheme in TradeoffScheme::ALL {
            let dof = match scheme {
                TradeoffScheme::Stia => tradeoff_k3(gamma)?,
                TradeoffScheme::ZfTdma => baseline_zf_tdma(capped)?,
                TradeoffScheme::ZfMat => baseline_zf_mat(capped)?,
                TradeoffScheme::Tdma => frac(1, 1),
                TradeoffScheme::Mat => mat_dof_k3(),
            };
            rows.push(TradeoffPoint { scheme, gamma, dof });
        }
    }
    Ok(rows)
}

/// General-`K` table: STIA, ZF/TDMA and TDMA rows only.
pub fn emit_tradeoff_table_general(users: usize, gammas: &[Fraction]) -> Result<Vec<TradeoffPoint>> {
    if users == 3 {
        return emit_tradeoff_table(gammas);
    }
    if gammas.is_empty() {
        return Err(Error::Precondition("empty gamma grid".into()));
    }
    let mut rows = Vec::with_capacity(gammas.len() * 3);
    for &gamma in gammas {
        let capped = gamma.min(frac(1, 1));
        rows.push(TradeoffPoint {
            scheme: TradeoffScheme::Stia,
            gamma,
            dof: tradeoff_general(users, gamma)?,
        });
        rows.push(TradeoffPoint {
            scheme: TradeoffScheme::ZfTdma,
            gamma,
            dof: baseline_zf_tdma_general(users, capped)?,
        });
        rows.push(TradeoffPoint {
            scheme: TradeoffScheme::Tdma,
            gamma,
            dof: frac(1, 1),
        });
    }
    Ok(rows)
}

/// Transmission strategies that can be simulated at signal level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimScheme {
    /// Scheduler plan of STIA rounds plus ZF/TDMA edge slots.
    Stia,
    /// ZF when current CSIT exists, TDMA otherwise.
    ZfTdma,
    /// ZF in every slot; needs zero feedback delay.
    Zf,
    /// One user per slot, round robin.
    Tdma,
}

impl SimScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stia => "stia",
            Self::ZfTdma => "zf_tdma",
            Self::Zf => "zf",
            Self::Tdma => "tdma",
        }
    }
}

impl fmt::Display for SimScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stia" => Ok(Self::Stia),
            "zf_tdma" | "zf-tdma" => Ok(Self::ZfTdma),
            "zf" => Ok(Self::Zf),
            "tdma" => Ok(Self::Tdma),
            other => Err(Error::Domain(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Everything that defines one simulated system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationSetup {
    pub scheme: SimScheme,
    pub users: usize,
    pub delay: DelayConfig,
    /// STIA rounds per trial for [`SimScheme::Stia`]; coherence blocks per
    /// trial for the other schemes.
    pub rounds: u64,
}

impl SimulationSetup {
    pub fn antennas(&self) -> usize {
        self.users - 1
    }

    fn validate(&self) -> Result<()> {
        if self.users < 3 {
            return Err(Error::Domain(format!("need K >= 3 users, got {}", self.users)));
        }
        if self.rounds < 1 {
            return Err(Error::Domain("need at least one round per trial".into()));
        }
        match self.scheme {
            SimScheme::Stia => {
                if self.delay.coherence() != self.users as u64 || self.delay.feedback_delay() != 1 {
                    return Err(Error::Domain(format!(
                        "STIA plans exist for T_c = K = {} and T_fb = 1, got T_c = {}, T_fb = {}",
                        self.users,
                        self.delay.coherence(),
                        self.delay.feedback_delay()
                    )));
                }
            }
            SimScheme::Zf => {
                if self.delay.feedback_delay() != 0 {
                    return Err(Error::Domain("pure ZF needs current CSIT in every slot (T_fb = 0)".into()));
                }
            }
            SimScheme::ZfTdma | SimScheme::Tdma => {}
        }
        Ok(())
    }
}

/// Result of a slope estimation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofEstimate {
    pub scheme: SimScheme,
    pub users: usize,
    pub coherence: u64,
    pub feedback_delay: u64,
    pub gamma_num: i64,
    pub gamma_den: i64,
    pub rounds: u64,
    pub snr_grid_db: Vec<f64>,
    /// Mean sum rate in bits per slot at each grid point.
    pub mean_sum_rates: Vec<f64>,
    pub slope: f64,
    /// Half-width of a 95% bootstrap interval for the slope.
    pub confidence_halfwidth: f64,
    pub trials: usize,
    pub seed: u64,
    /// Channel draws discarded as ill-conditioned.
    pub resamples: u64,
}

impl DofEstimate {
    pub fn gamma(&self) -> Fraction {
        frac(self.gamma_num, self.gamma_den)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Sum rate per slot of one trial at every SNR point, or `None` if a channel
/// draw was ill-conditioned.
fn trial_rates(
    setup: &SimulationSetup,
    plan: Option<&SchedulerPlan>,
    process: &FadingProcess,
    snrs: &[f64],
) -> Result<Option<Vec<f64>>> {
    let users = setup.users;
    let mut bits = vec![0.0; snrs.len()];

    let zf_slot = |slot: u64, bits: &mut [f64]| -> Result<bool> {
        let channels = process.channels_at(slot);
        let skip = tdma_select(slot, users);
        let served: Vec<usize> = (1..=users).filter(|&u| u != skip).collect();
        let w = match crate::precoding::build_zf_precoder(&channels, &served) {
            Ok(w) => w,
            Err(Error::IllConditionedChannel { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        for (b, &snr) in bits.iter_mut().zip(snrs) {
            *b += protocol::zf_rates_from_precoder(&channels, &served, &w, snr).iter().sum::<f64>();
        }
        Ok(true)
    };
    let tdma_slot = |slot: u64, bits: &mut [f64]| {
        let channels = process.channels_at(slot);
        let h: &ChannelVector = &channels[tdma_select(slot, users) - 1];
        for (b, &snr) in bits.iter_mut().zip(snrs) {
            *b += protocol::tdma_slot_rate(h, snr);
        }
    };

    let horizon = match (setup.scheme, plan) {
        (SimScheme::Stia, Some(plan)) => {
            for round in &plan.stia_rounds {
                let rc = RoundChannels {
                    reference_slot: round.reference_slot,
                    reference: process.channels_at(round.reference_slot).to_vec(),
                    phase_two_slots: round.phase_two_slots.clone(),
                    phase_two: round
                        .phase_two_slots
                        .iter()
                        .map(|&s| process.channels_at(s).to_vec())
                        .collect(),
                };
                let precoders = match protocol::round_precoders(&rc) {
                    Ok(p) => p,
                    Err(Error::IllConditionedChannel { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                };
                for user in 1..=users {
                    let eff = protocol::effective_channel(user, &rc, &precoders);
                    for (b, &snr) in bits.iter_mut().zip(snrs) {
                        // round_rate is per slot over the K slots of the round.
                        *b += users as f64 * protocol::round_rate(&eff, snr);
                    }
                }
            }
            for &slot in &plan.zf_slots {
                if !zf_slot(slot, &mut bits)? {
                    return Ok(None);
                }
            }
            for &slot in &plan.tdma_slots {
                tdma_slot(slot, &mut bits);
            }
            plan.horizon
        }
        (SimScheme::Stia, None) => unreachable!("STIA trials need a plan"),
        (scheme, _) => {
            let horizon = setup.rounds * setup.delay.coherence();
            for slot in 1..=horizon {
                let use_zf = match scheme {
                    SimScheme::Zf => true,
                    SimScheme::ZfTdma => setup.delay.current_available(slot),
                    _ => false,
                };
                if use_zf {
                    if !zf_slot(slot, &mut bits)? {
                        return Ok(None);
                    }
                } else {
                    tdma_slot(slot, &mut bits);
                }
            }
            horizon
        }
    };

    Ok(Some(bits.into_iter().map(|b| b / horizon as f64).collect()))
}

/// Per-trial sum rates (bits/slot) at each SNR point, in trial order, plus
/// the number of resampled channel draws.
pub fn simulate_sum_rates(
    setup: &SimulationSetup,
    snr_grid_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, u64)> {
    setup.validate()?;
    let snrs: Vec<f64> = snr_grid_db.iter().map(|&d| db_to_linear(d)).collect();
    let plan = match setup.scheme {
        SimScheme::Stia => Some(build_plan_general(setup.users, setup.rounds)?),
        _ => None,
    };

    let per_trial: Vec<(Vec<f64>, u64)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            for attempt in 0..MAX_RESAMPLES_PER_TRIAL {
                let process = FadingProcess::new(
                    setup.users,
                    setup.antennas(),
                    setup.delay.coherence(),
                    derive_seed(seed, &[trial, attempt]),
                )?;
                if let Some(rates) = trial_rates(setup, plan.as_ref(), &process, &snrs)? {
                    return Ok((rates, attempt));
                }
            }
            Err(Error::Domain(format!(
                "trial {trial}: no well-conditioned channel draw in {MAX_RESAMPLES_PER_TRIAL} attempts"
            )))
        })
        .collect::<Result<_>>()?;

    let resamples = per_trial.iter().map(|(_, a)| a).sum();
    Ok((per_trial.into_iter().map(|(r, _)| r).collect(), resamples))
}

/// Estimates the sum-DoF of a scheme as the slope of mean sum rate against
/// `log2(SNR)` over the grid.
pub fn estimate_dof_slope(
    setup: &SimulationSetup,
    snr_grid_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<DofEstimate> {
    if snr_grid_db.len() < 2 {
        return Err(Error::Precondition("need at least two SNR points".into()));
    }
    if snr_grid_db.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("SNR grid must be strictly increasing".into()));
    }
    let top = *snr_grid_db.last().expect("non-empty grid");
    if top < MIN_TOP_SNR_DB {
        return Err(Error::Precondition(format!(
            "SNR grid must reach {MIN_TOP_SNR_DB} dB, tops out at {top} dB"
        )));
    }
    if trials < MIN_TRIALS {
        return Err(Error::Precondition(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }

    let (rates, resamples) = simulate_sum_rates(setup, snr_grid_db, trials, seed)?;
    let xs: Vec<f64> = snr_grid_db.iter().map(|&d| db_to_linear(d).log2()).collect();

    let mut means = vec![0.0; xs.len()];
    for r in &rates {
        for (m, v) in means.iter_mut().zip(r) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= trials as f64);
    let slope = fit_slope(&xs, &means);

    // The regression is linear in the rates, so the slope of a resampled mean
    // is the mean of the resampled per-trial slopes.
    let per_trial_slopes: Vec<f64> = rates.iter().map(|r| fit_slope(&xs, r)).collect();
    let mut rng = stream_rng(derive_seed(seed, &[u64::MAX]), 0);
    let boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            (0..trials)
                .map(|_| per_trial_slopes[rng.random_range(0..trials)])
                .sum::<f64>()
                / trials as f64
        })
        .collect();
    let boot_mean = boot.iter().sum::<f64>() / boot.len() as f64;
    let boot_sd = (boot.iter().map(|b| (b - boot_mean).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt();

    let gamma = setup.delay.gamma();
    Ok(DofEstimate {
        scheme: setup.scheme,
        users: setup.users,
        coherence: setup.delay.coherence(),
        feedback_delay: setup.delay.feedback_delay(),
        gamma_num: *gamma.numer(),
        gamma_den: *gamma.denom(),
        rounds: setup.rounds,
        snr_grid_db: snr_grid_db.to_vec(),
        mean_sum_rates: means,
        slope,
        confidence_halfwidth: 1.96 * boot_sd,
        trials,
        seed,
        resamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn tradeoff_piecewise_values() {
        assert_eq!(tradeoff_k3(frac(0, 1)).unwrap(), frac(2, 1));
        assert_eq!(tradeoff_k3(frac(1, 3)).unwrap(), frac(2, 1));
        assert_eq!(tradeoff_k3(frac(2, 3)).unwrap(), frac(7, 4));
        assert_eq!(tradeoff_k3(frac(1, 1)).unwrap(), frac(3, 2));
        assert_eq!(tradeoff_k3(frac(3, 2)).unwrap(), frac(3, 2));
        assert!(tradeoff_k3(frac(-1, 5)).is_err());
    }

    #[test]
    fn tradeoff_continuity_at_breakpoints() {
        let eps = frac(1, 1_000_000);
        for bp in [frac(1, 3), frac(1, 1)] {
            let left = tradeoff_k3(bp - eps).unwrap();
            let right = tradeoff_k3(bp + eps).unwrap();
            let at = tradeoff_k3(bp).unwrap();
            assert!((left - at).abs() <= frac(1, 1_000_000));
            assert!((right - at).abs() <= frac(1, 1_000_000));
        }
    }

    #[test]
    fn baselines() {
        assert_eq!(baseline_zf_tdma(frac(1, 3)).unwrap(), frac(5, 3));
        assert_eq!(baseline_zf_mat(frac(1, 3)).unwrap(), frac(11, 6));
        assert_eq!(baseline_zf_tdma(frac(0, 1)).unwrap(), frac(2, 1));
        assert_eq!(baseline_zf_mat(frac(0, 1)).unwrap(), frac(2, 1));
        assert!(baseline_zf_tdma(frac(4, 3)).is_err());
        assert!(baseline_zf_mat(frac(-1, 3)).is_err());
    }

    #[test]
    fn table_rows_complete() {
        let grid = [frac(0, 1), frac(1, 3), frac(2, 3), frac(1, 1), frac(4, 3)];
        let rows = emit_tradeoff_table(&grid).unwrap();
        assert_eq!(rows.len(), grid.len() * 5);
        let stia: Vec<Fraction> = rows
            .iter()
            .filter(|r| r.scheme == TradeoffScheme::Stia)
            .map(|r| r.dof)
            .collect();
        assert_eq!(stia, vec![frac(2, 1), frac(2, 1), frac(7, 4), frac(3, 2), frac(3, 2)]);
        assert!(emit_tradeoff_table(&[]).is_err());
    }

    #[test]
    fn general_curve() {
        assert_eq!(tradeoff_general(4, frac(1, 4)).unwrap(), frac(3, 1));
        assert_eq!(tradeoff_general(4, frac(1, 1)).unwrap(), frac(1, 1));
        assert_eq!(tradeoff_general(4, frac(2, 1)).unwrap(), frac(1, 1));
        let rows = emit_tradeoff_table_general(5, &[frac(0, 1), frac(1, 2)]).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].dof, frac(4, 1));
    }

    #[test]
    fn slope_of_injected_rates() {
        let xs: Vec<f64> = [40.0, 50.0, 60.0].iter().map(|&d| db_to_linear(d).log2()).collect();
        for d in [1.0, 5.0 / 3.0, 2.0, 3.0] {
            let ys: Vec<f64> = xs.iter().map(|x| d * x - 0.73).collect();
            assert!((fit_slope(&xs, &ys) - d).abs() < 1e-12);
        }
    }

    #[test]
    fn setup_validation() {
        let bad = SimulationSetup {
            scheme: SimScheme::Stia,
            users: 3,
            delay: DelayConfig::new(4, 1).unwrap(),
            rounds: 4,
        };
        assert!(matches!(bad.validate(), Err(Error::Domain(_))));
        let zf = SimulationSetup {
            scheme: SimScheme::Zf,
            users: 3,
            delay: DelayConfig::new(3, 1).unwrap(),
            rounds: 4,
        };
        assert!(zf.validate().is_err());
    }

    #[test]
    fn estimate_preconditions() {
        let setup = SimulationSetup {
            scheme: SimScheme::Tdma,
            users: 3,
            delay: DelayConfig::new(3, 1).unwrap(),
            rounds: 2,
        };
        assert!(estimate_dof_slope(&setup, &[40.0, 50.0], 10, 1).is_err());
        assert!(estimate_dof_slope(&setup, &[10.0, 20.0], 1000, 1).is_err());
        assert!(estimate_dof_slope(&setup, &[50.0, 40.0], 1000, 1).is_err());
        assert!(estimate_dof_slope(&setup, &[40.0], 1000, 1).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [SimScheme::Stia, SimScheme::ZfTdma, SimScheme::Zf, SimScheme::Tdma] {
            assert_eq!(s.as_str().parse::<SimScheme>().unwrap(), s);
        }
        assert!("mat".parse::<SimScheme>().is_err());
    }
}
