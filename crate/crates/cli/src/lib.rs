//! Command-line driver for QE-ES experiments: single runs, seed sweeps and plots.

pub mod aggregate;
pub mod commands;
pub mod plot;
