//! Block-fading channel realizations and the transmitter's view of them
//! under delayed feedback.
//!
//! Slots and blocks are 1-based. Block `b` covers slots
//! `T_c (b - 1) + 1 ..= T_c b`. Every user feeds back at the first slot of a
//! block and the report reaches the transmitter `T_fb` slots later.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used by [`coherence_time_estimate`], in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

// Each user's draws start at a distinct ChaCha word offset inside the block's
// stream. 2^20 words is far more than any realistic antenna count consumes.
const USER_WORD_STRIDE: u128 = 1 << 20;

/// Channel from the transmitter to one user during one coherence block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelVector {
    pub entries: Vec<Complex64>,
    /// 1-based user index.
    pub user: usize,
    /// 1-based block index.
    pub block: u64,
}

impl ChannelVector {
    pub fn new(entries: Vec<Complex64>, user: usize, block: u64) -> Self {
        debug_assert!(entries.iter().all(|z| z.is_finite()));
        Self {
            entries,
            user,
            block,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }
}

/// Coherence time and feedback delay, both in slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DelayConfig {
    coherence: u64,
    feedback_delay: u64,
}

impl DelayConfig {
    pub fn new(coherence: u64, feedback_delay: u64) -> Result<Self> {
        if coherence == 0 {
            return Err(Error::Domain("coherence time must be at least one slot".into()));
        }
        Ok(Self {
            coherence,
            feedback_delay,
        })
    }

    pub fn coherence(&self) -> u64 {
        self.coherence
    }

    pub fn feedback_delay(&self) -> u64 {
        self.feedback_delay
    }

    /// `T_fb / T_c` as an exact fraction.
    pub fn gamma(&self) -> Ratio<i64> {
        Ratio::new(self.feedback_delay as i64, self.coherence as i64)
    }

    pub fn block_of(&self, slot: u64) -> u64 {
        assert!(slot >= 1, "slots are 1-based");
        (slot - 1) / self.coherence + 1
    }

    pub fn block_start(&self, block: u64) -> u64 {
        assert!(block >= 1, "blocks are 1-based");
        self.coherence * (block - 1) + 1
    }

    /// Whether the transmitter knows the channel of the slot's own block.
    pub fn current_available(&self, slot: u64) -> bool {
        slot - self.block_start(self.block_of(slot)) >= self.feedback_delay
    }

    /// Whether feedback for an earlier block has arrived by `slot`.
    pub fn outdated_available(&self, slot: u64, block: u64) -> bool {
        block >= 1 && block < self.block_of(slot) && self.block_start(block) + self.feedback_delay <= slot
    }

    /// Past blocks whose feedback has arrived by `slot`, ascending.
    pub fn outdated_blocks(&self, slot: u64) -> impl Iterator<Item = u64> + '_ {
        (1..self.block_of(slot)).filter(move |&b| self.outdated_available(slot, b))
    }
}

/// What the transmitter knows at a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct CsitView {
    pub slot: u64,
    /// Channels of the slot's own block, if feedback has arrived.
    pub current: Option<Vec<ChannelVector>>,
    /// Channels of earlier blocks keyed by block index.
    pub outdated: BTreeMap<u64, Vec<ChannelVector>>,
}

/// I.i.d. Rayleigh block fading for `K` users and `N_t` transmit antennas.
///
/// Draws are keyed by `(seed, block, user)` so any block can be generated
/// independently of the others. Sampled blocks are cached.
#[derive(Debug)]
pub struct FadingProcess {
    users: usize,
    antennas: usize,
    coherence: u64,
    seed: u64,
    cache: RwLock<HashMap<u64, Arc<[ChannelVector]>>>,
}

impl Clone for FadingProcess {
    fn clone(&self) -> Self {
        let cache = self.cache.read().expect("fading cache poisoned").clone();
        Self {
            cache: RwLock::new(cache),
            ..*self
        }
    }
}

impl FadingProcess {
    pub fn new(users: usize, antennas: usize, coherence: u64, seed: u64) -> Result<Self> {
        if users == 0 || antennas == 0 {
            return Err(Error::Domain("need at least one user and one antenna".into()));
        }
        if coherence == 0 {
            return Err(Error::Domain("coherence time must be at least one slot".into()));
        }
        Ok(Self {
            users,
            antennas,
            coherence,
            seed,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn coherence(&self) -> u64 {
        self.coherence
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The `K` channel vectors of a block, one per user in user order.
    pub fn sample_block(&self, block: u64) -> Arc<[ChannelVector]> {
        assert!(block >= 1, "blocks are 1-based");
        if let Some(hit) = self.cache.read().expect("fading cache poisoned").get(&block) {
            return Arc::clone(hit);
        }
        let fresh: Arc<[ChannelVector]> = (1..=self.users).map(|u| self.draw(block, u)).collect();
        let mut cache = self.cache.write().expect("fading cache poisoned");
        Arc::clone(cache.entry(block).or_insert(fresh))
    }

    /// Channels in effect at `slot`.
    pub fn channels_at(&self, slot: u64) -> Arc<[ChannelVector]> {
        assert!(slot >= 1, "slots are 1-based");
        self.sample_block((slot - 1) / self.coherence + 1)
    }

    /// Transmitter knowledge at `slot` under the given feedback timing.
    ///
    /// Panics if `config` disagrees with the process on the coherence time.
    pub fn csit_at(&self, config: &DelayConfig, slot: u64) -> CsitView {
        assert_eq!(
            config.coherence(),
            self.coherence,
            "delay config and fading process disagree on T_c"
        );
        let block = config.block_of(slot);
        let current = config
            .current_available(slot)
            .then(|| self.sample_block(block).to_vec());
        let outdated = config
            .outdated_blocks(slot)
            .map(|b| (b, self.sample_block(b).to_vec()))
            .collect();
        CsitView {
            slot,
            current,
            outdated,
        }
    }

    fn draw(&self, block: u64, user: usize) -> ChannelVector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(block);
        rng.set_word_pos(user as u128 * USER_WORD_STRIDE);
        let entries = (0..self.antennas).map(|_| complex_gaussian(&mut rng)).collect();
        ChannelVector::new(entries, user, block)
    }
}

/// One draw of CN(0, 1): real and imaginary parts each N(0, 1/2).
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Rule-of-thumb coherence time `c / (8 f v)` in seconds.
pub fn coherence_time_estimate(carrier_hz: f64, speed_m_per_s: f64) -> Result<f64> {
    if !(carrier_hz > 0.0) || !(speed_m_per_s > 0.0) {
        return Err(Error::Domain(format!(
            "carrier frequency and speed must be positive (got {carrier_hz} Hz, {speed_m_per_s} m/s)"
        )));
    }
    Ok(SPEED_OF_LIGHT / (8.0 * carrier_hz * speed_m_per_s))
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}
