use std::fmt;

use serde::Serialize;

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration; `path` locates the offending key.
    Config { path: String, message: String },
    Core(hybrid_radiance::Error),
    Io { path: String, source: std::io::Error },
}

#[derive(Serialize)]
struct Record<'a> {
    error: &'a str,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a str>,
    message: String,
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use hybrid_radiance::Error as E;
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(E::Domain(_) | E::Consistency(_)) => 2,
            CliError::Core(E::Capacity { .. }) => 4,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    fn kind(&self) -> &'static str {
        use hybrid_radiance::Error as E;
        match self {
            CliError::Config { .. } => "config",
            CliError::Core(E::Domain(_)) => "domain",
            CliError::Core(E::Consistency(_)) => "consistency",
            CliError::Core(E::Capacity { .. }) => "capacity",
            CliError::Core(E::RootNotFound { .. }) => "root_not_found",
            CliError::Core(E::EigenSolver { .. }) => "eigensolver",
            CliError::Core(E::Degeneracy { .. }) => "degeneracy",
            CliError::Core(E::Integration { .. }) => "integration",
            CliError::Io { .. } => "io",
        }
    }

    /// One-line JSON record for the diagnostic stream.
    pub fn record(&self) -> String {
        let path = match self {
            CliError::Config { path, .. } | CliError::Io { path, .. } => Some(path.as_str()),
            CliError::Core(_) => None,
        };
        let rec = Record {
            error: self.kind(),
            exit_code: self.exit_code(),
            path,
            message: match self {
                CliError::Config { message, .. } => message.clone(),
                CliError::Core(e) => e.to_string(),
                CliError::Io { source, .. } => source.to_string(),
            },
        };
        serde_json::to_string(&rec).expect("error record serialises")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { path, message } if path.is_empty() => write!(f, "config error: {message}"),
            CliError::Config { path, message } => write!(f, "config error at {path}: {message}"),
            CliError::Core(e) => e.fmt(f),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<hybrid_radiance::Error> for CliError {
    fn from(e: hybrid_radiance::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
