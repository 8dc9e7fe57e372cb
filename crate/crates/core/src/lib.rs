//! Analysis toolkit for degraded wiretap channels.
//!
//! The crate covers four layers:
//!
//! * finite-alphabet probability primitives ([`prob`]) and channels ([`channel`]),
//! * exact secrecy metrics ([`metrics`]) and secrecy-capacity solving with
//!   optimality certificates ([`capacity`]),
//! * Monte Carlo estimation of information spectra ([`spectrum`]) and of the
//!   random-coding wiretap construction ([`sim`]),
//! * the Gaussian wiretap channel ([`gaussian`]) and memoryless
//!   non-stationary channel sequences ([`nonstationary`]).
//!
//! All information quantities are reported in bits. Every randomized routine
//! takes a [`rng::MonteCarlo`] driver so that results are reproducible from a
//! master seed regardless of the number of worker threads.

pub mod capacity;
pub mod channel;
pub mod cli;
mod error;
pub mod gaussian;
pub mod io;
pub mod metrics;
pub mod nonstationary;
pub mod prob;
pub mod rng;
pub mod sim;
pub mod spectrum;
pub mod stats;

pub use error::{Error, Result};

/// Version string echoed into every output record.
pub const VERSION: &str = concat!("wiretap ", env!("CARGO_PKG_VERSION"));
