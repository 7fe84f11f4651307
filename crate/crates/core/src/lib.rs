//! Monte Carlo simulation and analysis of pulsed photon-counting experiments
//! on single erbium ions coupled to a nanophotonic cavity.
//!
//! The crate is organised bottom-up:
//!
//! - [`physics`]: closed-form cavity QED and line-shape relations.
//! - [`engine`]: the shot-by-shot Monte Carlo producing [`engine::ClickStream`]s.
//! - [`analysis`]: histograms, fits, pulsed autocorrelation and Purcell factors.
//! - [`io`]: configuration, `ERTT` click-stream files and CSV exports.
//!
//! Every random draw comes from a counter-based stream keyed by the master
//! seed and the shot index, so results do not depend on thread count.

pub mod analysis;
pub mod calibrate;
pub mod engine;
pub mod error;
pub mod io;
mod par;
pub mod physics;
pub mod rng;

pub use error::{Error, Result};
pub use par::Execution;
