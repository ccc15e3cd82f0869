//! Command-line front end for `nvconf`: parameter sweeps to CSV, Neumark
//! dumps, Monte Carlo validation reports and SVG plots.

pub mod config;
pub mod error;
pub mod neumark;
pub mod plot;
pub mod sweep;
pub mod validate;

pub use config::SweepConfig;
pub use error::CliError;
