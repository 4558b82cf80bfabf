//! Uplink two-user NOMA link simulation: power-domain (OFDM + OFDM) and
//! waveform-domain (OFDM-IM + OFDM) superposition, joint max-log demapping,
//! LDPC coding and successive interference cancellation with hard or soft
//! reconstruction.
//!
//! The [`harness`] module drives Monte Carlo experiments and writes CSV
//! results; the other modules are the link building blocks.

// `!(x > 0.0)` deliberately rejects NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
mod error;
pub mod harness;
pub mod ldpc;
pub mod modem;
pub mod mud;
pub mod oracle;
pub mod rng;
pub mod selftest;
pub mod sic;

pub use error::{Error, Result};
