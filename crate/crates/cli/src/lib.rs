//! Command-line frontend for the fault-analysis library: waveform
//! synthesis, record analysis with per-window CSV and JSON summary output,
//! and the two Monte-Carlo error studies. All file I/O lives here.

// negated comparisons like `!(x > 0.0)` deliberately catch NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod io;

use thiserror::Error;

/// Command outcomes map onto stable process exit codes: 0 success,
/// 1 usage error, 2 data error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
