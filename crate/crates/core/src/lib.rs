//! Link-level simulation of the `K`-user MISO broadcast channel with delayed
//! CSI feedback.
//!
//! The transmitter has `N_t = K - 1` antennas and learns each coherence
//! block's channel `T_fb` slots after the block starts. Space-time
//! interference alignment (STIA) sends all `K (K - 1)` symbols unprecoded in
//! one slot without CSIT, then re-creates the interference each user already
//! overheard in `K - 1` later slots using current and outdated CSI. Users
//! subtract the two observations and are left with `K - 1` clean equations
//! in their own symbols.
//!
//! Modules, bottom up:
//!
//! - [`numerics`]: small dense complex solves, rank and conditioning.
//! - [`channel`]: block fading draws and the transmitter's CSI at each slot.
//! - [`precoding`]: STIA, ZF and TDMA beamformers.
//! - [`protocol`]: transmit, receive, cancel and decode one round; rates.
//! - [`scheduler`]: partition of a slot horizon into STIA/ZF/TDMA slots.
//! - [`analysis`]: exact trade-off curves and Monte Carlo DoF slopes.
//! - [`verify`]: batched property checks.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod numerics;
pub mod precoding;
pub mod protocol;
pub mod rng;
pub mod scheduler;
pub mod verify;

pub use analysis::{
    baseline_zf_mat, baseline_zf_tdma, emit_tradeoff_table, estimate_dof_slope, tradeoff_k3, DofEstimate,
    Fraction, SimScheme, SimulationSetup, TradeoffPoint, TradeoffScheme,
};
pub use channel::{coherence_time_estimate, ChannelVector, CsitView, DelayConfig, FadingProcess};
pub use error::{Error, Result};
pub use numerics::ComplexMatrix;
pub use precoding::{build_stia_precoders, build_zf_precoder, tdma_select, PrecoderSet};
pub use protocol::{EffectiveChannel, ReceivedSignal, RoundChannels, StiaRoundResult, SymbolBlock};
pub use scheduler::{account_dof, build_plan_general, build_plan_k3, DofAccount, SchedulerPlan};

pub use num_complex::Complex64;
