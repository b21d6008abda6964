//! Command layer for the beam-laser simulator: config resolution, CSV and
//! manifest emission, sweep execution, and the figure pipelines.

pub mod commands;
pub mod config;
pub mod csvout;
pub mod figures;
pub mod manifest;
pub mod sweep;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config keys or value combinations (exit code 2).
    #[error("{0}")]
    Usage(String),
    /// Numeric or simulation failure (exit code 3).
    #[error("{0}")]
    Numeric(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io { .. } => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn numeric(msg: impl std::fmt::Display) -> Self {
        CliError::Numeric(msg.to_string())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Scale presets: `Desk` keeps every pipeline comfortably inside a laptop
/// budget; `Paper` uses the full published parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Desk,
    Paper,
}

/// Run `f` inside a rayon pool with the requested thread count (or the
/// default pool when unset). Every pipeline stores results in indexed
/// slots, so outputs are byte-identical for any thread count.
pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::numeric(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
