//! Partition of a slot horizon into STIA rounds, ZF slots and TDMA slots.
//!
//! With `T_c = K` and `T_fb = 1` the first slot of every block has no CSIT
//! and the remaining `K - 1` slots have current CSIT. Round `k` uses the
//! first slot of block `k` as its reference and then one slot from each of
//! the blocks `k + 1, ..., k + K - 1`, taking position `K + 1 - j` of block
//! `k + j`. Every current-CSIT position of a block is therefore claimed by a
//! different round, so rounds interleave without collisions. What is left
//! over at the edges of the horizon is classified by CSIT: current CSIT goes
//! to ZF, none goes to TDMA.

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::channel::DelayConfig;
use crate::error::{Error, Result};

/// Slot indices of one STIA round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StiaRound {
    /// 1-based round number.
    pub index: u64,
    /// Phase-one slot, transmitted without CSIT.
    pub reference_slot: u64,
    /// Phase-two slots, ascending.
    pub phase_two_slots: Vec<u64>,
}

impl StiaRound {
    /// The round's index set, ascending.
    pub fn slots(&self) -> Vec<u64> {
        let mut all: Vec<u64> = std::iter::once(self.reference_slot)
            .chain(self.phase_two_slots.iter().copied())
            .collect();
        all.sort_unstable();
        all
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerPlan {
    pub users: usize,
    pub rounds: u64,
    pub delay: DelayConfig,
    pub horizon: u64,
    pub stia_rounds: Vec<StiaRound>,
    pub zf_slots: BTreeSet<u64>,
    pub tdma_slots: BTreeSet<u64>,
}

/// What a slot is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum SlotRole {
    StiaReference { round: u64 },
    StiaPhaseTwo { round: u64 },
    Zf,
    Tdma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotAssignment {
    pub slot: u64,
    #[serde(flatten)]
    pub role: SlotRole,
}

/// Symbols delivered over a plan and the resulting exact DoF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofAccount {
    pub symbols_delivered: u64,
    pub slots_used: u64,
    pub dof: Ratio<i64>,
}

impl DofAccount {
    pub fn new(symbols_delivered: u64, slots_used: u64) -> Self {
        assert!(slots_used > 0, "cannot account an empty horizon");
        Self {
            symbols_delivered,
            slots_used,
            dof: Ratio::new(symbols_delivered as i64, slots_used as i64),
        }
    }
}

/// The three-user plan with `I_k = {3k-2, 3k+3, 3k+5}`,
/// `I_ZF = {2, 3, 5, 3n+6}` and `I_TDMA = {3n+1, 3n+4}`.
pub fn build_plan_k3(n: u64) -> Result<SchedulerPlan> {
    if n < 1 {
        return Err(Error::Domain("need at least one STIA round".into()));
    }
    let stia_rounds = (1..=n)
        .map(|k| StiaRound {
            index: k,
            reference_slot: 3 * k - 2,
            phase_two_slots: vec![3 * k + 3, 3 * k + 5],
        })
        .collect();
    Ok(SchedulerPlan {
        users: 3,
        rounds: n,
        delay: DelayConfig::new(3, 1)?,
        horizon: 3 * n + 6,
        stia_rounds,
        zf_slots: [2, 3, 5, 3 * n + 6].into_iter().collect(),
        tdma_slots: [3 * n + 1, 3 * n + 4].into_iter().collect(),
    })
}

/// The `K`-user plan for `T_c = K`, `T_fb = 1`.
pub fn build_plan_general(users: usize, n: u64) -> Result<SchedulerPlan> {
    if users < 3 {
        return Err(Error::Domain(format!("STIA plans need K >= 3, got {users}")));
    }
    if n < 1 {
        return Err(Error::Domain("need at least one STIA round".into()));
    }
    let k_slots = users as u64;
    let delay = DelayConfig::new(k_slots, 1)?;
    let horizon = k_slots * (n + k_slots - 1);

    let stia_rounds: Vec<StiaRound> = (1..=n)
        .map(|k| StiaRound {
            index: k,
            reference_slot: k_slots * k - (k_slots - 1),
            phase_two_slots: (1..k_slots)
                .map(|j| k_slots * (k + j - 1) + (k_slots + 1 - j))
                .collect(),
        })
        .collect();

    let used: BTreeSet<u64> = stia_rounds.iter().flat_map(StiaRound::slots).collect();
    let (zf_slots, tdma_slots): (BTreeSet<u64>, BTreeSet<u64>) = (1..=horizon)
        .filter(|s| !used.contains(s))
        .partition(|&s| delay.current_available(s));

    Ok(SchedulerPlan {
        users,
        rounds: n,
        delay,
        horizon,
        stia_rounds,
        zf_slots,
        tdma_slots,
    })
}

impl SchedulerPlan {
    /// Role of every slot in `1..=horizon`, ascending.
    pub fn assignments(&self) -> Vec<SlotAssignment> {
        let mut out: Vec<SlotAssignment> = Vec::with_capacity(self.horizon as usize);
        for r in &self.stia_rounds {
            out.push(SlotAssignment {
                slot: r.reference_slot,
                role: SlotRole::StiaReference { round: r.index },
            });
            out.extend(r.phase_two_slots.iter().map(|&slot| SlotAssignment {
                slot,
                role: SlotRole::StiaPhaseTwo { round: r.index },
            }));
        }
        out.extend(self.zf_slots.iter().map(|&slot| SlotAssignment { slot, role: SlotRole::Zf }));
        out.extend(self.tdma_slots.iter().map(|&slot| SlotAssignment { slot, role: SlotRole::Tdma }));
        out.sort_by_key(|a| a.slot);
        out
    }

    /// Checks disjointness, coverage and CSIT consistency of the plan.
    pub fn validate(&self) -> Result<()> {
        let violation = |msg: String| Err(Error::Precondition(msg));
        let delay = &self.delay;
        let mut seen = BTreeSet::new();
        let mut claim = |slot: u64| -> Result<()> {
            if slot < 1 || slot > self.horizon {
                return violation(format!("slot {slot} outside 1..={}", self.horizon));
            }
            if !seen.insert(slot) {
                return violation(format!("slot {slot} assigned twice"));
            }
            Ok(())
        };

        for r in &self.stia_rounds {
            if r.phase_two_slots.len() != self.users - 1 {
                return violation(format!(
                    "round {} has {} phase-two slots, expected {}",
                    r.index,
                    r.phase_two_slots.len(),
                    self.users - 1
                ));
            }
            claim(r.reference_slot)?;
            if delay.current_available(r.reference_slot) {
                return violation(format!(
                    "round {} reference slot {} has current CSIT",
                    r.index, r.reference_slot
                ));
            }
            let ref_block = delay.block_of(r.reference_slot);
            let mut blocks = BTreeSet::from([ref_block]);
            for &s in &r.phase_two_slots {
                claim(s)?;
                if !delay.current_available(s) {
                    return violation(format!("round {} slot {s} lacks current CSIT", r.index));
                }
                if !delay.outdated_available(s, ref_block) {
                    return violation(format!(
                        "round {} slot {s} lacks outdated CSIT for block {ref_block}",
                        r.index
                    ));
                }
                if !blocks.insert(delay.block_of(s)) {
                    return violation(format!("round {} reuses block {}", r.index, delay.block_of(s)));
                }
            }
        }
        for &s in &self.zf_slots {
            claim(s)?;
            if !delay.current_available(s) {
                return violation(format!("ZF slot {s} lacks current CSIT"));
            }
        }
        for &s in &self.tdma_slots {
            claim(s)?;
            if delay.current_available(s) {
                return violation(format!("TDMA slot {s} has current CSIT"));
            }
        }
        if seen.len() as u64 != self.horizon {
            return violation(format!("{} of {} slots assigned", seen.len(), self.horizon));
        }
        Ok(())
    }

    pub fn stia_slot_count(&self) -> u64 {
        self.stia_rounds.len() as u64 * self.users as u64
    }
}

/// STIA rounds carry `K (K - 1)` symbols, ZF slots `N_t = K - 1`, TDMA slots one.
pub fn account_dof(plan: &SchedulerPlan) -> DofAccount {
    let k = plan.users as u64;
    let symbols = plan.stia_rounds.len() as u64 * k * (k - 1)
        + plan.zf_slots.len() as u64 * (k - 1)
        + plan.tdma_slots.len() as u64;
    DofAccount::new(symbols, plan.horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[u64]) -> BTreeSet<u64> {
        v.iter().copied().collect()
    }

    #[test]
    fn k3_golden_sets() {
        let plan = build_plan_k3(3).unwrap();
        let sets: Vec<Vec<u64>> = plan.stia_rounds.iter().map(StiaRound::slots).collect();
        assert_eq!(sets, vec![vec![1, 6, 8], vec![4, 9, 11], vec![7, 12, 14]]);
        assert_eq!(plan.zf_slots, set(&[2, 3, 5, 15]));
        assert_eq!(plan.tdma_slots, set(&[10, 13]));
        assert_eq!(plan.horizon, 15);
        plan.validate().unwrap();
    }

    #[test]
    fn k3_dof_values() {
        assert_eq!(account_dof(&build_plan_k3(3).unwrap()).dof, Ratio::new(28, 15));
        assert_eq!(account_dof(&build_plan_k3(1).unwrap()).dof, Ratio::new(16, 9));
        assert!(build_plan_k3(0).is_err());
    }

    #[test]
    fn general_k3_matches_literal_plan() {
        for n in 1..=60 {
            assert_eq!(build_plan_general(3, n).unwrap(), build_plan_k3(n).unwrap());
        }
    }

    #[test]
    fn general_rejects_small_k() {
        assert!(build_plan_general(2, 5).is_err());
        assert!(build_plan_general(4, 0).is_err());
    }

    #[test]
    fn validate_catches_overlap_and_csit_errors() {
        let mut plan = build_plan_k3(2).unwrap();
        plan.zf_slots.insert(1);
        assert!(plan.validate().is_err());

        let mut plan = build_plan_k3(2).unwrap();
        let moved = plan.tdma_slots.pop_first().unwrap();
        plan.zf_slots.insert(moved);
        assert!(plan.validate().is_err());

        let mut plan = build_plan_k3(2).unwrap();
        plan.zf_slots.remove(&2);
        assert!(plan.validate().is_err());
    }

    #[test]
    fn assignments_cover_horizon() {
        let plan = build_plan_general(4, 5).unwrap();
        let a = plan.assignments();
        assert_eq!(a.len() as u64, plan.horizon);
        assert!(a.iter().enumerate().all(|(i, x)| x.slot == i as u64 + 1));
        assert_eq!(a[0].role, SlotRole::StiaReference { round: 1 });
    }
}
