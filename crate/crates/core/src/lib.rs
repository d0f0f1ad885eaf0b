//! Simulation and analysis of pulsed two-mode squeezed light: joint spectra,
//! photon statistics, time-of-flight spectroscopy and time-tag pipelines.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod jsa;
pub mod montecarlo;
pub mod photon;
pub mod report;
pub mod stats;
pub mod tags;
pub mod tof;
pub mod units;

pub use error::{Error, Result};
