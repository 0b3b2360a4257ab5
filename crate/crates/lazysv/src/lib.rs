//! Command-line front end for `lazysv-core`: configuration documents, a
//! rayon-backed trial runner, CSV/JSON reports and verification suites.
//!
//! Exit codes: 0 success, 1 invalid configuration or IO failure, 2 a
//! verification check failed, 3 a computation budget was exceeded.

pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod verify;

pub use cli::run;
pub use error::{CliError, CliResult};
pub use report::Report;
pub use runner::RayonRunner;
