//! Transmit beamformers: space-time aligned precoders built from current and
//! outdated CSI, plus the zero-forcing and TDMA baselines.

use num_complex::Complex64;

use crate::channel::ChannelVector;
use crate::error::{Error, Result};
use crate::numerics::{self, norm_inf_vec, ComplexMatrix};

/// Beamforming matrices `V^(k)` for one phase-two slot, indexed by user
/// (position 0 is user 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub slot: u64,
    pub per_user: Vec<ComplexMatrix>,
}

impl PrecoderSet {
    /// All-identity precoders, i.e. an unprecoded superposition.
    pub fn identity(users: usize, slot: u64) -> Self {
        Self {
            slot,
            per_user: vec![ComplexMatrix::identity(users - 1); users],
        }
    }

    pub fn users(&self) -> usize {
        self.per_user.len()
    }

    /// `V^(k)` for 1-based user `k`.
    pub fn for_user(&self, user: usize) -> &ComplexMatrix {
        &self.per_user[user - 1]
    }

    /// `sum_k ||V^(k)||_F^2`, the transmit energy per unit-variance symbol set.
    pub fn total_energy(&self) -> f64 {
        self.per_user.iter().map(ComplexMatrix::frobenius_norm_sqr).sum()
    }
}

/// Stacks the rows `h^(j)T` for every user except `skip` (0-based).
fn stack_others(channels: &[ChannelVector], skip: usize) -> Result<ComplexMatrix> {
    let rows: Vec<&[Complex64]> = channels
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != skip)
        .map(|(_, h)| h.entries.as_slice())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

fn check_square_setup(channels: &[ChannelVector], what: &str) -> Result<usize> {
    let users = channels.len();
    if users < 2 {
        return Err(Error::Precondition(format!("{what}: need at least two users")));
    }
    if let Some(h) = channels.iter().find(|h| h.len() != users - 1) {
        return Err(Error::Precondition(format!(
            "{what}: user {} has {} antennas' worth of channel, expected N_t = K - 1 = {}",
            h.user,
            h.len(),
            users - 1
        )));
    }
    Ok(users)
}

fn ill_conditioned(user: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::SingularMatrix { condition } => Error::IllConditionedChannel { user, condition },
        other => other,
    }
}

/// Builds `V^(k) = [h^(j)T[n]]_{j != k}^{-1} [h^(j)T[ref]]_{j != k}` for every
/// user `k`, so that each interferer `j` sees user `k`'s symbols through the
/// same coefficients it saw in the reference slot.
pub fn build_stia_precoders(
    current: &[ChannelVector],
    outdated: &[ChannelVector],
    slot: u64,
) -> Result<PrecoderSet> {
    let users = check_square_setup(current, "current CSI")?;
    if check_square_setup(outdated, "outdated CSI")? != users {
        return Err(Error::Precondition(format!(
            "current CSI has {users} users, outdated CSI has {}",
            outdated.len()
        )));
    }
    let per_user = (0..users)
        .map(|k| {
            let now = stack_others(current, k)?;
            let then = stack_others(outdated, k)?;
            numerics::solve_right(&now, &then).map_err(ill_conditioned(k + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrecoderSet { slot, per_user })
}

/// Worst relative alignment error
/// `max_{k, j != k} ||h^(j)T[n] V^(k) - h^(j)T[ref]||_inf / ||h^(j)T[ref]||_inf`.
pub fn alignment_residual(set: &PrecoderSet, current: &[ChannelVector], outdated: &[ChannelVector]) -> f64 {
    let mut worst = 0.0f64;
    for (k, v) in set.per_user.iter().enumerate() {
        for j in (0..current.len()).filter(|&j| j != k) {
            let seen = v.row_mul(&current[j].entries);
            let target = &outdated[j].entries;
            let diff: Vec<Complex64> = seen.iter().zip(target).map(|(a, b)| a - b).collect();
            worst = worst.max(norm_inf_vec(&diff) / norm_inf_vec(target));
        }
    }
    worst
}

/// Zero-forcing precoder for the `N_t` users in `served` (1-based).
///
/// Column `i` serves `served[i]`: it is orthogonal to every other served
/// user's channel and has unit norm.
pub fn build_zf_precoder(current: &[ChannelVector], served: &[usize]) -> Result<ComplexMatrix> {
    let antennas = current
        .first()
        .map(ChannelVector::len)
        .ok_or_else(|| Error::Precondition("no channels supplied".into()))?;
    if served.len() != antennas {
        return Err(Error::Precondition(format!(
            "zero forcing serves exactly N_t = {antennas} users, got {}",
            served.len()
        )));
    }
    for (i, &u) in served.iter().enumerate() {
        if u == 0 || u > current.len() {
            return Err(Error::Precondition(format!("served user {u} out of range")));
        }
        if served[..i].contains(&u) {
            return Err(Error::Precondition(format!("user {u} listed twice")));
        }
    }
    let rows: Vec<&[Complex64]> = served.iter().map(|&u| current[u - 1].entries.as_slice()).collect();
    let stacked = ComplexMatrix::from_rows(&rows)?;
    let inverse = numerics::solve_right(&stacked, &ComplexMatrix::identity(antennas))
        .map_err(|e| ill_conditioned(served[0])(e))?;
    let norms: Vec<f64> = (0..antennas)
        .map(|j| numerics::norm2_vec(&inverse.column(j)))
        .collect();
    Ok(ComplexMatrix::from_fn(antennas, antennas, |i, j| inverse[(i, j)] / norms[j]))
}

/// Round-robin TDMA user for a slot: `(slot mod K) + 1`.
pub fn tdma_select(slot: u64, users: usize) -> usize {
    assert!(slot >= 1, "slots are 1-based");
    assert!(users >= 1);
    (slot % users as u64) as usize + 1
}
