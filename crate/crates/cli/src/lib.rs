//! Command-line front end for psifrac: problem files, the `solve`, `check`,
//! `residual`, `convergence` and `operators` commands, and their CSV/JSON
//! artifacts.

// `!(x > 0.0)` is used on purpose to reject NaN along with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::ProblemFile;
pub use error::{exit, CliError};
