//! Command-line driver: construct line classes, verify them two ways, print
//! character spectra, search derivation sequences and check invariance.

pub mod commands;
pub mod document;
pub mod search;

pub use commands::{run, Cli, CliError};
