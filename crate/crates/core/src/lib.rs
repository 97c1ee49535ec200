//! Network beamforming for two-step amplify-and-forward relay networks.
//!
//! The transmitter and every relay carry their own short-term power budget.
//! Relays match-filter the phases of their channels so that all second-step
//! contributions add coherently at the receiver; what remains is choosing how
//! much of each budget to spend. This crate contains:
//!
//! * [`beamsolver`]: the exact receive-SNR maximizer for networks without a
//!   direct link, plus best-relay selection, the aggregate-constraint
//!   allocation and an exhaustive grid oracle.
//! * [`dlsolver`]: power control when a direct link is present during the
//!   first step, the second step, or both.
//! * [`feedback`]: the two low-rate broadcasts that let each relay recover its
//!   own power from local channel knowledge.
//! * [`channel`]: Rayleigh fading, path loss and network geometries.
//! * [`montecarlo`]: BPSK link-level trials, MRC decoding, error-rate curves
//!   and diversity estimation.
//!
//! The crate is `no_std` and only needs `alloc`. All powers and SNRs are
//! linear; conversion to dB is left to callers.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod beamsolver;
pub mod channel;
pub mod dlsolver;
mod error;
pub mod feedback;
pub mod montecarlo;
mod power;
pub mod quartic;
mod rng;
mod search;

pub use error::{Error, Result};
pub use power::{PowerAllocation, PowerBudget};
pub use rng::{RngSeed, SimRng};

pub use num_complex::Complex64;
