//! Dataset synthesis, offline baselines, sweeps and Ω reports on top of
//! `rehearsal-core`.

pub mod commands;
pub mod config;
pub mod records;
pub mod report;

use rehearsal_core::Error;

/// Process exit status for a failed command: 2 for usage and config
/// problems, 4 for numeric failures, 3 for everything data-related.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Usage(_) | Error::Config(_) => 2,
        Error::Numeric { .. } => 4,
        _ => 3,
    }
}
