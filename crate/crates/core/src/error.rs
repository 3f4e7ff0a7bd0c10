use thiserror::Error;

/// Errors raised across the library. The CLI maps each variant to an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("state error: {0}")]
    State(String),
    #[error("grid mismatch: {0}")]
    Grid(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("overflow guard: {0}")]
    Overflow(String),
    #[error("instability: {0}")]
    Instability(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// 2 for usage/config problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Param(_) | Error::Precondition(_) | Error::Config(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Param(_) => "param",
            Error::Precondition(_) => "precondition",
            Error::State(_) => "state",
            Error::Grid(_) => "grid",
            Error::Quadrature(_) => "quadrature",
            Error::Overflow(_) => "overflow",
            Error::Instability(_) => "instability",
            Error::Resolution(_) => "resolution",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
