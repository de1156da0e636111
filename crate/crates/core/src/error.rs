use thiserror::Error;

/// Errors produced by the solvers, LP machinery and oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance has a {found} constraint, operation needs {expected}")]
    WrongConstraintKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("no candidate radius admits a feasible relaxation")]
    NoFeasibleRadius,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("point is not in the polytope: {0}")]
    NotInPolytope(String),

    #[error("configuration LP needs {columns} guessed sets, cap is {cap}")]
    ConfigTooLarge { columns: usize, cap: usize },

    #[error("enumeration needs {count} items, cap is {cap}")]
    TooLarge { count: usize, cap: usize },

    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! invariant {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::InternalInvariantViolation(format!($($arg)+)));
        }
    };
}
pub(crate) use invariant;
