use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumFieldError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Polynomial / field-element parse failure, with a 0-based byte offset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectiveError {
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid hypersurface: {0}")]
    InvalidHypersurface(String),
    #[error("point lies on the support of divisor {divisor} at place {place}")]
    SupportHit { divisor: usize, place: String },
    #[error(transparent)]
    NumField(#[from] NumFieldError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PositionError {
    #[error("hypersurface {index} has degree {degree}; exact mode needs hyperplanes")]
    Nonlinear { index: usize, degree: u32 },
    #[error("family has {count} divisors; the enumeration cap is {cap}")]
    TooMany { count: usize, cap: usize },
    #[error("invalid family: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("invalid parameters: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    NumField(#[from] NumFieldError),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
    #[error(transparent)]
    Position(#[from] PositionError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
