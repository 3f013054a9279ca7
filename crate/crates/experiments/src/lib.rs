//! Experiment driver for the `ams` command line tool: scenario configs,
//! table sweeps, rate-function regressions and a self-validation suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod rate;
pub mod scenario;
pub mod tables;
pub mod validate;

pub use error::{ExpError, Result};
