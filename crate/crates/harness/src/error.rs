use std::fmt;
use std::path::{Path, PathBuf};

use pbs_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
    pub const RESOURCE: i32 = 4;
    pub const DEGENERATE: i32 = 5;
}

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    Config(String),
    Io { path: PathBuf, source: std::io::Error },
    Json { path: PathBuf, source: serde_json::Error },
    Csv(csv::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Adds the offending path to I/O and format errors from the core.
    pub fn at(path: &Path) -> impl FnOnce(CoreError) -> CliError + '_ {
        move |e| match e {
            CoreError::Io(source) => CliError::io(path, source),
            CoreError::Format { offset, reason } => CliError::Core(CoreError::Format {
                offset,
                reason: format!("{}: {reason}", path.display()),
            }),
            other => CliError::Core(other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                CoreError::Shape(_) | CoreError::Config(_) => exit::CONFIG,
                CoreError::Format { .. } | CoreError::Io(_) => exit::IO,
                CoreError::Resource { .. } => exit::RESOURCE,
                CoreError::DegenerateRow { .. } | CoreError::NonFinite { .. } => exit::DEGENERATE,
            },
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } | CliError::Json { .. } | CliError::Csv(_) => exit::IO,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                CoreError::Shape(_) => "shape",
                CoreError::Config(_) => "config",
                CoreError::Format { .. } => "format",
                CoreError::Io(_) => "io",
                CoreError::Resource { .. } => "resource",
                CoreError::DegenerateRow { .. } => "degenerate",
                CoreError::NonFinite { .. } => "non_finite",
            },
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "format",
            CliError::Csv(_) => "io",
        }
    }

    /// `E<code> <kind>: <message>` on one line.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("E{} {}: {}", self.exit_code(), self.kind(), msg)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) => f.write_str(m),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Json { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Csv(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}
