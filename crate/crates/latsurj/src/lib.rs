//! Command-line companion to `latsurj-core`: matrix and distribution
//! formats, Monte Carlo experiments, exhaustive sweeps over small finite
//! fields, and report rendering.

pub mod cli;
pub mod config;
pub mod dist;
pub mod experiments;
pub mod format;
pub mod report;
pub mod stats;
pub mod sweeps;
