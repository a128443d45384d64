//! Feasibility laboratory for 5G New Radio over GEO and LEO satellites.
//!
//! The crate is organised bottom-up:
//!
//! * [`scenario`] holds physical constants, architecture options and the
//!   builtin GEO/LEO scenarios.
//! * [`geometry`] computes slant ranges, delays, satellite passes and Doppler.
//! * [`numerology`] covers NR/NB-IoT timing arithmetic and HARQ dimensioning.
//! * [`mac_sim`] is a deterministic discrete-event simulator for random access,
//!   timing advance and HARQ.
//! * [`feasibility`] turns all of the above into PASS/FAIL reports.
//! * [`waveform`] generates CP-OFDM and f-OFDM signals and measures them
//!   through a TWTA model.
//! * [`cli`] is the command-line front end.

pub mod cli;
pub mod error;
pub mod feasibility;
pub mod geometry;
pub mod mac_sim;
pub mod numerology;
pub mod scenario;
pub mod waveform;

pub use error::{Error, Result};
pub use scenario::{Architecture, PhysicalConstants, ScenarioConfig, Service, TimerSet};
