use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("selection rule violated: {0}")]
    SelectionRule(String),
    #[error("lookup failed: {0}")]
    Lookup(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{}:{line}: {msg}", path.as_deref().map(|p| p.display().to_string()).unwrap_or_else(|| "<input>".into()))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        msg: String,
    },
    #[error("no signal: {0}")]
    NoSignal(String),
    #[error("insufficient contrast: {0}")]
    InsufficientContrast(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("fit did not converge after {iterations} iterations (cost {cost:e}, parameters {params:?})")]
    NonConvergence {
        iterations: usize,
        cost: f64,
        params: Vec<f64>,
    },
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn with_path(self, p: &std::path::Path) -> Self {
        match self {
            Error::Parse { line, msg, .. } => Error::Parse {
                path: Some(p.to_path_buf()),
                line,
                msg,
            },
            other => other,
        }
    }

    /// Stable machine-readable category, used by the CLI for exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::SelectionRule(_) => "selection-rule",
            Error::Lookup(_) => "lookup",
            Error::Unsupported(_) => "unsupported",
            Error::Numerical(_) => "numerical",
            Error::Parse { .. } => "parse",
            Error::NoSignal(_) => "no-signal",
            Error::InsufficientContrast(_) => "insufficient-contrast",
            Error::InsufficientData(_) => "insufficient-data",
            Error::NonConvergence { .. } => "non-convergence",
            Error::FileNotFound(_) => "file-not-found",
            Error::Io(_) => "io",
            Error::Json(_) => "parse",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::FileNotFound(_) => 3,
            Error::Parse { .. } | Error::Json(_) => 4,
            Error::Config(_) => 5,
            Error::Io(_) => 6,
            _ => 1,
        }
    }
}

/// Opens a file, mapping a missing path onto [`Error::FileNotFound`].
pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })
}
