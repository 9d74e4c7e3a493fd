//! Command-line front end for `triplet-core`: parameter loading, scenario
//! sweeps, oracle runs, regime reports and force budgets. Every run that
//! writes files also writes a `manifest.json` from which it can be
//! repeated with `--manifest`.

pub mod args;
mod error;
pub mod manifest;
pub mod output;
pub mod run;

pub use error::CliError;
