use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// The CSIT matrix has numerical rank below the user count.
    #[error("degenerate channel: numerical rank {rank} < {users} users")]
    DegenerateChannel { rank: usize, users: usize },

    /// The Gamma moment match has a non-positive second moment term.
    #[error("degenerate moment match: eps^4 (n_t+1) + (1-2 eps^2) K = {denominator} <= 0 (eps={epsilon}, n_t={n_t}, K={users})")]
    DegenerateMatch {
        epsilon: f64,
        n_t: usize,
        users: usize,
        denominator: f64,
    },

    /// round(D K) is too small for the requested expression.
    #[error("degenerate rounding: round(D K) = {rounded}, need at least {required}")]
    DegenerateRounding { rounded: u64, required: u64 },

    /// Invalid configuration field.
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Json { .. } => 3,
            Error::Domain { .. }
            | Error::DegenerateChannel { .. }
            | Error::DegenerateMatch { .. }
            | Error::DegenerateRounding { .. } => 4,
            Error::Io { .. } | Error::Csv { .. } => 5,
        }
    }
}
