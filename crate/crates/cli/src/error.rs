use std::fmt;

use serde_json::json;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARAMETER: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Core(pqd_slln::Error),
    /// Malformed flags, config or parameter combinations.
    Usage(String),
    Io(std::io::Error),
    Internal(String),
}

impl From<pqd_slln::Error> for CliError {
    fn from(e: pqd_slln::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "parameter error: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_input_error() => EXIT_PARAMETER,
            CliError::Core(pqd_slln::Error::Numeric { .. }) => EXIT_NUMERIC,
            CliError::Core(_) => EXIT_FAILURE,
            CliError::Usage(_) => EXIT_PARAMETER,
            CliError::Io(_) | CliError::Internal(_) => EXIT_FAILURE,
        }
    }

    fn kind(&self) -> &'static str {
        use pqd_slln::Error as E;
        match self {
            CliError::Core(E::Domain(_)) => "domain",
            CliError::Core(E::Parameter(_)) | CliError::Usage(_) => "parameter",
            CliError::Core(E::Numeric { .. }) => "numeric",
            CliError::Core(E::UndefinedRatio(_)) => "undefined_ratio",
            CliError::Core(E::Internal(_)) | CliError::Internal(_) => "internal",
            CliError::Io(_) => "io",
        }
    }

    /// Single-line JSON for standard error.
    pub fn to_json_line(&self) -> String {
        let mut obj = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Core(pqd_slln::Error::Numeric {
            estimate, error_bound, ..
        }) = self
        {
            obj["estimate"] = json!(estimate);
            obj["error_bound"] = json!(error_bound);
        }
        obj.to_string()
    }
}
