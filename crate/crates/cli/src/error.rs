use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error("solver failed at step {step}: {source}")]
    Solver {
        step: usize,
        #[source]
        source: asearch_core::Error,
    },

    #[error(transparent)]
    Core(#[from] asearch_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} of {total} sweep runs failed")]
    SweepFailures { failed: usize, total: usize },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config { line: None, msg: msg.into() }
    }

    pub fn at_line(line: usize, msg: impl Into<String>) -> Self {
        CliError::Config { line: Some(line), msg: msg.into() }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Core(_) | CliError::Io { .. } => 2,
            CliError::Solver { .. } => 3,
            CliError::SweepFailures { .. } => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
