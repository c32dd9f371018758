//! Experiment drivers and output formatting behind the `l1lab` binary.

pub mod experiment;
pub mod output;
