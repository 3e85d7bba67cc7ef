//! Experiment runner, file formats and command-line front end for the
//! `lineperc-core` line percolation library.

pub mod cli;
pub mod config;
pub mod output;
pub mod plot;
pub mod resume;
pub mod runner;
pub mod snapshot;
pub mod spec;
pub mod verify;

pub use spec::ExperimentSpec;
