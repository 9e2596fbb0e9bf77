//! Experiment runner for the wricci curvature toolkit: configuration,
//! subcommand orchestration, CSV/JSON emission and the named validation
//! checks that make up the acceptance suite.

#![deny(unsafe_code)]

pub mod checks;
pub mod config;
pub mod csvio;
pub mod run;
