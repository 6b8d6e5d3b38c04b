use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series not convergent at (t,x): {0}")]
    NotConvergent(String),
    #[error("no convergent regime: {0}")]
    NoConvergentRegime(String),
    #[error("precision unreachable: {0}")]
    PrecisionUnreachable(String),
    #[error("degenerate case: {0}")]
    Degenerate(String),
    #[error("pole/branch error: {0}")]
    Branch(String),
    #[error("not recognized: {0}")]
    NotRecognized(String),
    #[error("no CM point with H(D) <= 2 matches: {0}")]
    NoCmPoint(String),
    #[error("root selection failed: {0}")]
    RootSelection(String),
    #[error("continuation failed: {0}")]
    Continuation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown case id: {0}")]
    UnknownCase(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
