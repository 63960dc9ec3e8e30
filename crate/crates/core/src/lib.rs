//! Analysis and Monte Carlo validation of short-packet structures on the
//! AWGN channel under a latency constraint.
//!
//! Two packet structures are covered: a time-multiplexed detection preamble
//! followed by the codeword, and a detection sequence superimposed on the
//! codeword over all channel uses. For each structure the crate provides
//!
//! * Zadoff-Chu detection sequences and their partial-period correlations
//!   ([`zc`]),
//! * the finite-blocklength normal approximation of the decoding error
//!   ([`fbl`]),
//! * closed-form false-alarm / misdetection / packet-error expressions
//!   ([`preamble`], [`superimposed`]),
//! * threshold and overhead optimizers plus the adaptive-rate scheme
//!   ([`optimize`]),
//! * a seeded, embarrassingly parallel link simulator ([`sim`]).

pub mod error;
pub mod fbl;
pub mod optimize;
pub mod preamble;
pub mod scenario;
pub mod sim;
pub mod superimposed;
pub mod zc;

pub use error::{Error, Result};
pub use scenario::{linear_to_snr_db, snr_db_to_linear, ErrorBreakdown, Scenario, Structure};
