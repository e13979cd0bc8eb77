//! Configuration loading, result emission, and summary rendering behind the
//! `loopid` binary. Kept as a library so the formatting and manifest logic
//! can be tested without spawning processes.

pub mod config;
pub mod output;
pub mod summary;

use thiserror::Error;

/// Failures that map to exit code 1 (unusable input or environment).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot {action} {path}: {source}")]
    Io {
        action: &'static str,
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<loopid::Error> for CliError {
    fn from(e: loopid::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Exit status choice: 0 when every enforced bound check passed, 2 otherwise.
pub fn exit_code_for_checks(rows: &[Vec<loopid::BoundCheck>]) -> u8 {
    let all_pass = rows.iter().all(|checks| loopid::all_enforced_pass(checks));
    if all_pass {
        0
    } else {
        2
    }
}
