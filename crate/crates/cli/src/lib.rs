//! Workload replay, verification, generation and benchmarking on top of
//! `dyncover-core`.

pub mod bench;
pub mod cli;
pub mod format;
pub mod metrics;
pub mod replay;

use std::path::PathBuf;

use dyncover_core::workloads::Workload;
use dyncover_core::Params;

pub use format::{parse, to_text, ParseError, Parsed};
pub use replay::{run, verify, RunOptions, RunSummary, VerifyOptions, VerifyOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Params(String),
    #[error("verification failed at step {step}")]
    Violation { step: u64 },
    #[error("internal fault at step {step}: {msg}; state dumped to {}", dump.display())]
    Fault { step: u64, msg: String, dump: PathBuf },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation { .. } => 1,
            CliError::Parse { .. } | CliError::Params(_) | CliError::Io(_) => 2,
            CliError::Fault { .. } => 3,
        }
    }
}

/// How the engine is configured for a replay.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EngineChoice {
    pub eps: Option<f64>,
    pub beta: Option<f64>,
    pub exact_counters: bool,
}

impl EngineChoice {
    /// `--beta` wins over `--eps`; without either the workload's own `beta`
    /// is used, then its `eps_hint`. Also returns a warning when the workload
    /// asks for a `beta` that is not the one in use.
    pub fn params(&self, w: &Workload) -> Result<(Params, Option<String>), CliError> {
        let bad = |e: dyncover_core::Error| CliError::Params(e.to_string());
        let params = match (self.beta, self.eps, w.beta) {
            (Some(b), _, _) => w.params_with_beta(b).map_err(bad)?,
            (None, Some(e), _) => w.params(e).map_err(bad)?,
            (None, None, Some(b)) => w.params_with_beta(b).map_err(bad)?,
            (None, None, None) => w.params(w.header.eps_hint).map_err(bad)?,
        };
        let warning = match w.beta {
            Some(b) if (b - params.beta).abs() > 1e-12 => Some(format!(
                "warning: workload `{}` is tuned for beta = {b}, replaying with beta = {}",
                w.tag, params.beta
            )),
            _ => None,
        };
        Ok((params, warning))
    }
}
