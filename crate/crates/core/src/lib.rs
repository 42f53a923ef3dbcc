//! Simulation and verification toolkit for reflected Lévy storage processes
//! whose input alternates between *down* periods (server off, a subordinator
//! accumulates work) and *up* periods (a spectrally positive Lévy netput,
//! reflected at zero).
//!
//! The crate is organised bottom-up:
//!
//! * [`levy`]: parametric input processes, their Laplace exponents and the
//!   derived transforms (Pollaczek–Khinchin, stationary excess).
//! * [`sim`]: regime policies, the Skorokhod reflection and the path
//!   simulator (exact event-driven or Euler grid).
//! * [`estimators`]: ergodic transform estimates and martingale residuals
//!   computed from simulated paths.
//! * [`decomposition`]: closed-form right-hand sides and identity residuals
//!   for the workload decomposition.
//! * [`harness`]: JSON configuration, replicated runs, CSV/JSON reports and
//!   report verification.

pub mod decomposition;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod harness;
pub mod levy;
pub mod numfmt;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
