//! DoA-aided SIMO-OFDM receiver simulation library.
//!
//! A single-antenna transmitter sends block-pilot OFDM frames through a
//! multipath channel with per-path delay, Doppler, and direction of arrival;
//! a uniform linear array receiver separates the paths in the angle domain,
//! estimates their parameters from the pilot, and tracks the Doppler-induced
//! gain rotation with a decision-directed sliding window. The crate also
//! provides the Doppler initialization strategies (zero, EVM grid search,
//! dense-network regression), the modified Cramér-Rao bound for the Doppler
//! estimates, and a Monte Carlo experiment harness with a CLI front end.

pub mod bounds;
pub mod channel;
pub mod doppler_init;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod receiver;
pub mod signal;

pub use error::{Error, Result};
pub use signal::OfdmConfig;
