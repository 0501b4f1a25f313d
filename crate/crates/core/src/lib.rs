//! Discrete-time simulation and analysis of two parallel queues sharing one
//! server, where queue `H` is fed by heavy-tailed bursts and queue `L` by
//! light-tailed traffic.
//!
//! The crate is organised bottom-up:
//!
//! - [`traffic`]: arrival laws, reproducible random streams, and the exact
//!   renewal-theoretic tables (positive part, residual, age, duration) of a
//!   heavy input.
//! - [`analysis`]: closed-form and numeric asymptotics (log-MGF, Legendre
//!   transform, intrinsic exponent, tail-coefficient predictions).
//! - [`sim`]: the slot-level state machine, scheduling policies, and the
//!   coupled comparison system whose heavy queue is served every slot.
//! - [`estimators`]: streaming CCDF histograms and tail-index / decay-rate fits.
//! - [`oracle`]: brute-force ground truth (truncated Markov chains, renewal
//!   recursion, random-sum Monte Carlo).
//! - [`harness`]: configuration files, replication fan-out, sweeps, reports.

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod kv;
pub mod oracle;
pub mod sim;
pub mod traffic;

pub use error::{Error, Result};
