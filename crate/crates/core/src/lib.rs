//! Simulation and analysis toolkit for witnessing quantum coherence through
//! classical-mixture paradoxes, a nonlocal coherence game and photonic
//! coincidence experiments.
//!
//! The crate is `no_std` with `alloc`. File formats and the command line live
//! in the companion `cohwit` crate.

#![no_std]
// index loops mirror the summation formulas they implement
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod expsim;
pub mod game;
pub mod lhv;
pub mod linalg;
pub mod lp;
pub mod measure;
pub mod qstate;
pub mod tomo;

pub use error::{CoreError, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
