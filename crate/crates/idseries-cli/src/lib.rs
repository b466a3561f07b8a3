//! Command-line front end for the i.d. series bound library: config and
//! input-file parsing, subcommand dispatch, and CSV report emission.
//!
//! Exit codes: 0 success, 1 usage error (bad flags, malformed or missing
//! inputs), 2 computation error propagated from the library, 3 a simulation
//! found a bound below the empirical lower confidence limit. Every failure
//! prints one machine-readable stderr line `ERROR:<module>:<code>: detail`.

pub mod config;
pub mod csvio;
pub mod dispatch;
pub mod formats;

use std::fmt;

/// A failure with its exit class and a one-line diagnostic.
#[derive(Debug, Clone)]
pub struct AppError {
    pub module: String,
    pub code: String,
    pub detail: String,
    pub exit: i32,
}

impl AppError {
    pub fn usage(detail: impl Into<String>) -> Self {
        AppError { module: "cli".into(), code: "usage".into(), detail: detail.into(), exit: 1 }
    }

    pub fn missing_input(detail: impl Into<String>) -> Self {
        AppError { module: "cli".into(), code: "missing_input".into(), detail: detail.into(), exit: 1 }
    }

    pub fn parse(detail: impl Into<String>) -> Self {
        AppError { module: "cli".into(), code: "parse".into(), detail: detail.into(), exit: 1 }
    }

    pub fn io(detail: impl Into<String>) -> Self {
        AppError { module: "cli".into(), code: "io".into(), detail: detail.into(), exit: 2 }
    }

    pub fn bound_violation(detail: impl Into<String>) -> Self {
        AppError { module: "cli".into(), code: "bound_violation".into(), detail: detail.into(), exit: 3 }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ERROR:{}:{}: {}", self.module, self.code, self.detail)
    }
}

impl From<idseries::Error> for AppError {
    fn from(e: idseries::Error) -> Self {
        AppError { module: e.module.to_string(), code: e.code.to_string(), detail: e.detail.clone(), exit: 2 }
    }
}

/// Parses argv, runs the subcommand, and maps any failure to its exit code
/// with the diagnostic printed to stderr. Returns the process exit code.
pub fn run(argv: &[String]) -> i32 {
    let cfg = match config::parse_config(argv) {
        Ok(cfg) => cfg,
        Err(e) => {
            if e.exit == 0 {
                print!("{}", e.detail);
                return 0;
            }
            eprintln!("{e}");
            return e.exit;
        }
    };
    match dispatch::dispatch(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit
        }
    }
}
