//! File formats, reports and the command-line pipeline around `reciprec-core`.
//!
//! The library half exists so the binary stays thin and the integration
//! tests can drive every stage without spawning processes.

pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod pipeline;
pub mod report;

pub use error::{AppError, ExitCode};
