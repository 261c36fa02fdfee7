use std::fmt;

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// A verified claim did not hold.
    Verification(String),
    /// Unreadable or malformed input, or bad flags.
    Input(String),
    /// An enumeration guard fired.
    Guard(String),
    /// Anything the solvers report that is not the caller's fault.
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) | CliError::Solver(_) => 2,
            CliError::Guard(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Guard(m) => write!(f, "{m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<nucleolus::Error> for CliError {
    fn from(e: nucleolus::Error) -> Self {
        use nucleolus::Error as E;
        match e {
            E::SizeGuard { .. } => CliError::Guard(e.to_string()),
            E::InvalidInput(_) | E::Parse(_) | E::Json(_) | E::Io(_) | E::InsufficientFamily(_) => {
                CliError::Input(e.to_string())
            }
            E::NoFeasible(_) | E::Unbounded(_) | E::Internal(_) => CliError::Solver(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column()))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a path to I/O errors.
pub fn io_context<T>(r: std::io::Result<T>, path: &std::path::Path) -> CliResult<T> {
    r.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
