//! One STIA round end to end, plus single-slot ZF and TDMA transmissions.
//!
//! A round is one reference slot without CSIT (phase one) followed by `K - 1`
//! precoded slots (phase two). Transmit power is normalized per slot by a
//! scalar gain `alpha[n] = sqrt(P / sum_k ||V^(k)[n]||_F^2)`; receivers know
//! the gain of every slot and undo it before cancelling interference, which
//! keeps the alignment exact.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_gaussian, ChannelVector};
use crate::error::{Error, Result};
use crate::numerics::{self, dot, ComplexMatrix, DEFAULT_RANK_TOL};
use crate::precoding::{self, PrecoderSet};

/// Data symbols of one round: `K - 1` per user, position 0 is user 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    pub per_user: Vec<Vec<Complex64>>,
}

impl SymbolBlock {
    pub fn new(per_user: Vec<Vec<Complex64>>) -> Result<Self> {
        let users = per_user.len();
        if users < 2 {
            return Err(Error::Precondition("a symbol block needs at least two users".into()));
        }
        if let Some((k, s)) = per_user.iter().enumerate().find(|(_, s)| s.len() != users - 1) {
            return Err(Error::Precondition(format!(
                "user {} carries {} symbols, expected {}",
                k + 1,
                s.len(),
                users - 1
            )));
        }
        Ok(Self { per_user })
    }

    pub fn zeros(users: usize) -> Self {
        Self {
            per_user: vec![vec![Complex64::new(0.0, 0.0); users - 1]; users],
        }
    }

    /// Unit-variance circularly-symmetric Gaussian symbols.
    pub fn random_gaussian<R: Rng + ?Sized>(users: usize, rng: &mut R) -> Self {
        let per_user = (0..users)
            .map(|_| (0..users - 1).map(|_| complex_gaussian(rng)).collect())
            .collect();
        Self { per_user }
    }

    /// Unit-energy QPSK symbols.
    pub fn random_qpsk<R: Rng + ?Sized>(users: usize, rng: &mut R) -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let per_user = (0..users)
            .map(|_| {
                (0..users - 1)
                    .map(|_| {
                        let re = if rng.random::<bool>() { a } else { -a };
                        let im = if rng.random::<bool>() { a } else { -a };
                        Complex64::new(re, im)
                    })
                    .collect()
            })
            .collect();
        Self { per_user }
    }

    pub fn users(&self) -> usize {
        self.per_user.len()
    }

    pub fn for_user(&self, user: usize) -> &[Complex64] {
        &self.per_user[user - 1]
    }

    pub fn symbol_count(&self) -> usize {
        self.per_user.iter().map(Vec::len).sum()
    }

    /// Copy with one user's symbols replaced by zeros.
    pub fn without_user(&self, user: usize) -> Self {
        let mut out = self.clone();
        out.per_user[user - 1].iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        out
    }
}

/// How the transmitter scales each slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerPolicy {
    /// Send the raw precoded superposition (noise-free oracle path).
    Unscaled,
    /// Scale every slot so that `E||x||^2 = P` for unit-variance symbols.
    Total(f64),
}

impl PowerPolicy {
    fn gain(self, energy_per_symbol_set: f64) -> f64 {
        match self {
            PowerPolicy::Unscaled => 1.0,
            PowerPolicy::Total(p) => (p / energy_per_symbol_set).sqrt(),
        }
    }
}

/// A transmit vector together with the scalar gain applied to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub slot: u64,
    pub signal: Vec<Complex64>,
    pub gain: f64,
}

/// What every user received in one slot, tagged with the slot's transmit gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub slot: u64,
    pub per_user: Vec<Complex64>,
    pub gain: f64,
}

/// Interference-free observation model of one user over one round.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub user: usize,
    /// Row `m` is `h^(k)T[ref] - h^(k)T[n_m] V^(k)[n_m]`.
    pub matrix: ComplexMatrix,
    /// Reference slot first, then the phase-two slots.
    pub constituent_slots: Vec<u64>,
    /// `(alpha[ref] / alpha[n_m])^2` per phase-two slot. Equal to 1 when
    /// all slots carry the same gain.
    pub noise_ratio_sq: Vec<f64>,
}

impl EffectiveChannel {
    pub fn users(&self) -> usize {
        self.matrix.rows() + 1
    }

    /// Covariance of the noise on the normalized difference vector, in units
    /// of the receiver noise variance: the reference-slot noise is common to
    /// every row, so off-diagonal entries are 1 and the diagonal is
    /// `1 + (alpha[ref] / alpha[n_m])^2`.
    pub fn difference_noise_covariance(&self) -> ComplexMatrix {
        let m = self.matrix.rows();
        ComplexMatrix::from_fn(m, m, |i, j| {
            let v = if i == j { 1.0 + self.noise_ratio_sq[i] } else { 1.0 };
            Complex64::new(v, 0.0)
        })
    }
}

/// Outcome of a full round.
#[derive(Debug, Clone, PartialEq)]
pub struct StiaRoundResult {
    pub decoded: SymbolBlock,
    /// Per user, the worst relative coefficient left on any interfering
    /// symbol after cancellation.
    pub residual_interference: Vec<f64>,
    pub per_user_rate_bits: Vec<f64>,
    pub effective: Vec<EffectiveChannel>,
    pub resamples: u32,
    pub symbols_delivered: usize,
    pub slots_used: usize,
}

/// Channels seen during one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundChannels {
    pub reference_slot: u64,
    pub reference: Vec<ChannelVector>,
    pub phase_two_slots: Vec<u64>,
    pub phase_two: Vec<Vec<ChannelVector>>,
}

impl RoundChannels {
    pub fn users(&self) -> usize {
        self.reference.len()
    }

    fn validate(&self) -> Result<()> {
        let k = self.users();
        if self.phase_two.len() != k - 1 || self.phase_two_slots.len() != k - 1 {
            return Err(Error::Precondition(format!(
                "a {k}-user round needs {} phase-two slots",
                k - 1
            )));
        }
        if self.phase_two.iter().any(|c| c.len() != k) {
            return Err(Error::Precondition("every phase-two slot needs all users' channels".into()));
        }
        Ok(())
    }
}

/// Round parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundConfig {
    pub power: PowerPolicy,
    pub noise_std: f64,
}

impl RoundConfig {
    pub fn noise_free() -> Self {
        Self {
            power: PowerPolicy::Unscaled,
            noise_std: 0.0,
        }
    }

    /// SNR at which the round's rates are reported. The noise-free oracle
    /// reports rates as if the receiver noise had unit variance.
    pub fn rate_snr(&self) -> f64 {
        let p = match self.power {
            PowerPolicy::Unscaled => 1.0,
            PowerPolicy::Total(p) => p,
        };
        let noise_var = if self.noise_std > 0.0 {
            self.noise_std * self.noise_std
        } else {
            1.0
        };
        p / noise_var
    }
}

/// `sum_k s^(k)`, the unprecoded phase-one superposition.
pub fn superpose(symbols: &SymbolBlock) -> Vec<Complex64> {
    let n = symbols.users() - 1;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for s in &symbols.per_user {
        for (xi, si) in x.iter_mut().zip(s) {
            *xi += si;
        }
    }
    x
}

/// Phase one: all `K (K - 1)` symbols superposed without precoding.
pub fn phase_one_transmit(symbols: &SymbolBlock, slot: u64, power: PowerPolicy) -> Transmission {
    let k = symbols.users();
    let gain = power.gain((k * (k - 1)) as f64);
    let signal = superpose(symbols).into_iter().map(|z| z * gain).collect();
    Transmission { slot, signal, gain }
}

/// Phase two: `x[n] = alpha[n] sum_k V^(k)[n] s^(k)`.
pub fn phase_two_transmit(symbols: &SymbolBlock, precoders: &PrecoderSet, power: PowerPolicy) -> Transmission {
    assert_eq!(symbols.users(), precoders.users(), "symbol and precoder user counts differ");
    let n = symbols.users() - 1;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for (v, s) in precoders.per_user.iter().zip(&symbols.per_user) {
        for (xi, vi) in x.iter_mut().zip(v.mul_vec(s)) {
            *xi += vi;
        }
    }
    let gain = power.gain(precoders.total_energy());
    Transmission {
        slot: precoders.slot,
        signal: x.into_iter().map(|z| z * gain).collect(),
        gain,
    }
}

/// `y = h^T x + z` with `z ~ CN(0, noise_std^2)`.
pub fn receive<R: Rng + ?Sized>(h: &ChannelVector, x: &[Complex64], noise_std: f64, rng: &mut R) -> Complex64 {
    assert_eq!(h.len(), x.len(), "channel and transmit vector lengths differ");
    let clean = dot(&h.entries, x);
    if noise_std > 0.0 {
        clean + complex_gaussian(rng) * noise_std
    } else {
        clean
    }
}

/// Delivers one transmission to every user.
pub fn broadcast<R: Rng + ?Sized>(
    channels: &[ChannelVector],
    tx: &Transmission,
    noise_std: f64,
    rng: &mut R,
) -> ReceivedSignal {
    ReceivedSignal {
        slot: tx.slot,
        per_user: channels.iter().map(|h| receive(h, &tx.signal, noise_std, rng)).collect(),
        gain: tx.gain,
    }
}

/// Subtracts the phase-one observation from each phase-two observation of
/// user `user`, after undoing the slot gains.
///
/// `round[0]` is the reference slot. Entry `m` is
/// `y[n_m] / alpha[n_m] - y[ref] / alpha[ref]`; with noise off it equals
/// `(h^(k)T[n_m] V^(k)[n_m] - h^(k)T[ref]) s^(k)`. This is the negative of
/// the [`EffectiveChannel`] row convention.
pub fn cancel_interference(user: usize, round: &[ReceivedSignal]) -> Vec<Complex64> {
    let (reference, later) = round.split_first().expect("round needs a reference slot");
    let y_ref = reference.per_user[user - 1] / reference.gain;
    later.iter().map(|r| r.per_user[user - 1] / r.gain - y_ref).collect()
}

/// Builds user `user`'s effective channel for a round.
pub fn effective_channel(user: usize, channels: &RoundChannels, precoders: &[PrecoderSet]) -> EffectiveChannel {
    let k = channels.users();
    assert_eq!(precoders.len(), k - 1, "one precoder set per phase-two slot");
    let reference = &channels.reference[user - 1].entries;
    let rows: Vec<Vec<Complex64>> = channels
        .phase_two
        .iter()
        .zip(precoders)
        .map(|(now, set)| {
            let seen = set.for_user(user).row_mul(&now[user - 1].entries);
            reference.iter().zip(&seen).map(|(a, b)| a - b).collect()
        })
        .collect();
    let symbol_sets = (k * (k - 1)) as f64;
    EffectiveChannel {
        user,
        matrix: ComplexMatrix::from_rows(&rows).expect("effective channel rows are conformable"),
        constituent_slots: std::iter::once(channels.reference_slot)
            .chain(channels.phase_two_slots.iter().copied())
            .collect(),
        noise_ratio_sq: precoders.iter().map(|p| p.total_energy() / symbol_sets).collect(),
    }
}

/// Recovers `s^(k)` from the difference vector in the effective-channel sign
/// convention (`y[ref] - y[n_m]`, gains undone).
///
/// Passing a noise covariance whitens the system first; for a square
/// full-rank system the least-squares answer is then the plain solve.
pub fn decode_round(
    eff: &EffectiveChannel,
    differences: &[Complex64],
    noise_covariance: Option<&ComplexMatrix>,
) -> Result<Vec<Complex64>> {
    let expected = eff.matrix.rows();
    let failure = |rank| Error::DecodeFailure {
        user: eff.user,
        rank,
        expected,
    };
    let rank = numerics::rank_with_tol(&eff.matrix, DEFAULT_RANK_TOL);
    if rank < expected {
        return Err(failure(rank));
    }
    let (h, d) = match noise_covariance {
        Some(cov) => {
            let l = numerics::cholesky(cov)?;
            let cols: Vec<Vec<Complex64>> = (0..expected)
                .map(|j| numerics::forward_substitute(&l, &eff.matrix.column(j)))
                .collect();
            let h = ComplexMatrix::from_fn(expected, expected, |i, j| cols[j][i]);
            (h, numerics::forward_substitute(&l, differences))
        }
        None => (eff.matrix.clone(), differences.to_vec()),
    };
    numerics::solve_vec(&h, &d).map_err(|e| match e {
        Error::SingularMatrix { .. } => failure(rank),
        other => other,
    })
}

/// `log2 det(I + P_s Sigma^{-1/2} H H^H Sigma^{-1/2})`, computed as
/// `log2 det(Sigma + P_s H H^H) - log2 det(Sigma)`.
pub fn log_det_rate(h: &ComplexMatrix, noise_covariance: &ComplexMatrix, symbol_power: f64) -> f64 {
    let signal = (h * &h.adjoint()).scale_real(symbol_power);
    let total = noise_covariance + &signal;
    let num = numerics::log2_det_hpd(&total).expect("noise plus signal covariance is positive definite");
    let den = numerics::log2_det_hpd(noise_covariance).expect("noise covariance is positive definite");
    (num - den).max(0.0)
}

/// Rate of one user in bits per slot over a `K`-slot round, with equal power
/// `P / (K (K - 1))` per symbol.
pub fn round_rate(eff: &EffectiveChannel, snr_linear: f64) -> f64 {
    assert!(snr_linear > 0.0, "snr must be positive");
    let k = eff.users();
    let symbol_power = snr_linear / (k * (k - 1)) as f64;
    log_det_rate(&eff.matrix, &eff.difference_noise_covariance(), symbol_power) / k as f64
}

/// Builds the phase-two precoders for a round.
pub fn round_precoders(channels: &RoundChannels) -> Result<Vec<PrecoderSet>> {
    channels.validate()?;
    channels
        .phase_two
        .iter()
        .zip(&channels.phase_two_slots)
        .map(|(now, &slot)| precoding::build_stia_precoders(now, &channels.reference, slot))
        .collect()
}

/// Worst relative coefficient on any interfering symbol in user `user`'s
/// cancelled observations.
pub fn interference_residual(user: usize, channels: &RoundChannels, precoders: &[PrecoderSet]) -> f64 {
    let reference = &channels.reference[user - 1].entries;
    let scale = numerics::norm_inf_vec(reference);
    let mut worst = 0.0f64;
    for (now, set) in channels.phase_two.iter().zip(precoders) {
        for other in (1..=channels.users()).filter(|&i| i != user) {
            let seen = set.for_user(other).row_mul(&now[user - 1].entries);
            let diff: Vec<Complex64> = seen.iter().zip(reference).map(|(a, b)| a - b).collect();
            worst = worst.max(numerics::norm_inf_vec(&diff) / scale);
        }
    }
    worst
}

/// Runs a complete round: transmit, receive, cancel, decode.
pub fn run_stia_round<R: Rng + ?Sized>(
    channels: &RoundChannels,
    symbols: &SymbolBlock,
    config: RoundConfig,
    rng: &mut R,
) -> Result<StiaRoundResult> {
    let precoders = round_precoders(channels)?;
    run_stia_round_with(channels, &precoders, symbols, config, rng)
}

/// [`run_stia_round`] with caller-supplied precoders.
pub fn run_stia_round_with<R: Rng + ?Sized>(
    channels: &RoundChannels,
    precoders: &[PrecoderSet],
    symbols: &SymbolBlock,
    config: RoundConfig,
    rng: &mut R,
) -> Result<StiaRoundResult> {
    channels.validate()?;
    let k = channels.users();
    if symbols.users() != k {
        return Err(Error::Precondition(format!(
            "{} users of symbols for a {k}-user round",
            symbols.users()
        )));
    }

    let mut received = Vec::with_capacity(k);
    let first = phase_one_transmit(symbols, channels.reference_slot, config.power);
    received.push(broadcast(&channels.reference, &first, config.noise_std, rng));
    for (now, set) in channels.phase_two.iter().zip(precoders) {
        let tx = phase_two_transmit(symbols, set, config.power);
        received.push(broadcast(now, &tx, config.noise_std, rng));
    }

    let snr = config.rate_snr();
    let mut decoded = Vec::with_capacity(k);
    let mut effective = Vec::with_capacity(k);
    let mut rates = Vec::with_capacity(k);
    let mut residual = Vec::with_capacity(k);
    for user in 1..=k {
        let eff = effective_channel(user, channels, precoders);
        let differences: Vec<Complex64> = cancel_interference(user, &received).into_iter().map(|d| -d).collect();
        let cov = (config.noise_std > 0.0).then(|| eff.difference_noise_covariance());
        decoded.push(decode_round(&eff, &differences, cov.as_ref())?);
        rates.push(round_rate(&eff, snr));
        residual.push(interference_residual(user, channels, precoders));
        effective.push(eff);
    }

    let decoded = SymbolBlock { per_user: decoded };
    Ok(StiaRoundResult {
        symbols_delivered: decoded.symbol_count(),
        decoded,
        residual_interference: residual,
        per_user_rate_bits: rates,
        effective,
        resamples: 0,
        slots_used: k,
    })
}

/// Zero-forcing transmit vector `sqrt(P / N_t) W s`.
pub fn zf_transmit(precoder: &ComplexMatrix, symbols: &[Complex64], power: f64) -> Vec<Complex64> {
    let streams = precoder.cols() as f64;
    let gain = (power / streams).sqrt();
    precoder.mul_vec(symbols).into_iter().map(|z| z * gain).collect()
}

/// Per-stream rates `log2(1 + (P / N_t) |h_i^T w_i|^2)` of a ZF slot serving
/// `served` (1-based users), in the order given.
pub fn zf_slot_rates(channels: &[ChannelVector], served: &[usize], snr_linear: f64) -> Result<Vec<f64>> {
    let w = precoding::build_zf_precoder(channels, served)?;
    Ok(zf_rates_from_precoder(channels, served, &w, snr_linear))
}

/// Like [`zf_slot_rates`] for an already-built precoder.
pub fn zf_rates_from_precoder(
    channels: &[ChannelVector],
    served: &[usize],
    precoder: &ComplexMatrix,
    snr_linear: f64,
) -> Vec<f64> {
    let per_stream = snr_linear / served.len() as f64;
    served
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let g = dot(&channels[u - 1].entries, &precoder.column(i)).norm_sqr();
            (1.0 + per_stream * g).log2()
        })
        .collect()
}

/// TDMA transmit vector: full power on the first antenna. No CSIT is needed.
pub fn tdma_transmit(antennas: usize, symbol: Complex64, power: f64) -> Vec<Complex64> {
    let mut x = vec![Complex64::new(0.0, 0.0); antennas];
    x[0] = symbol * power.sqrt();
    x
}

/// Single-stream rate `log2(1 + P |h_1|^2)` for the TDMA transmit vector.
pub fn tdma_slot_rate(h: &ChannelVector, snr_linear: f64) -> f64 {
    (1.0 + snr_linear * h.entries[0].norm_sqr()).log2()
}
