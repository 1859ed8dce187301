use crate::classify::Class;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate squeeze |γ| = {0:e} below 1e-12")]
    DegenerateSqueeze(f64),
    #[error("matrix is not symplectic (scaled residual {0:e})")]
    NotSymplectic(f64),
    #[error("ambiguous classification near χ = {chi}: {first} or {second}")]
    Ambiguous { chi: f64, first: Class, second: Class },
    #[error("inconsistent numerical ranks: {0}")]
    Inconsistent(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unreachable target: {0}")]
    Unreachable(String),
    #[error("not equivalent: {0}")]
    NotEquivalent(String),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Ambiguous { .. } => 3,
            Error::Infeasible(_) | Error::Unreachable(_) | Error::NotEquivalent(_) => 4,
            _ => 2,
        }
    }
}
