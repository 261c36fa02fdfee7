use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An enumeration guard fired; `guard` names the operation.
    #[error("size guard `{guard}` exceeded: {actual} > {limit}")]
    SizeGuard {
        guard: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("coalition family too sparse: {0}")]
    InsufficientFamily(String),

    #[error("no feasible solution: {0}")]
    NoFeasible(String),

    #[error("unbounded: {0}")]
    Unbounded(String),

    /// Should not happen for well-posed inputs; surfaced for debugging.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn guard(guard: &'static str, limit: usize, actual: usize) -> Self {
        Error::SizeGuard {
            guard,
            limit,
            actual,
        }
    }
}
