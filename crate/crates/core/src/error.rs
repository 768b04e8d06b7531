use thiserror::Error;

/// Errors raised by the numerical kernels and the experiment layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("non-finite state at t = {time} (node {node})")]
    NonFiniteState { time: f64, node: usize },

    #[error("profile never crosses level {level}")]
    NoCrossing { level: f64 },

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("phase path terminates (p -> 0) at u = {0}")]
    PathTerminates(f64),

    #[error("step size underflow in ODE integration at x = {0}")]
    StepUnderflow(f64),

    #[error("bad bracket: low endpoint {low} gave {low_verdict}, high endpoint {high} gave {high_verdict}")]
    BadBracket {
        low: f64,
        high: f64,
        low_verdict: String,
        high_verdict: String,
    },

    #[error("undecided verdict at parameter value {0}")]
    UndecidedVerdict(f64),

    #[error("quadrature did not converge: doubling nodes changed the result by {0:e}")]
    QuadratureNotConverged(f64),

    #[error("front speed regression residual {residual:e} exceeds {tolerance:e}")]
    UndecidedSpeed { residual: f64, tolerance: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error in `{0}`")]
    Validation(String),

    #[error("replay mismatch in: {0:?}")]
    Mismatch(Vec<String>),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 numeric failure, 4 undecided/bracket.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::InvalidParameter { .. } => 2,
            Error::BadBracket { .. }
            | Error::UndecidedVerdict(_)
            | Error::UndecidedSpeed { .. }
            | Error::NoBracket(_) => 4,
            Error::Io(_) | Error::Mismatch(_) => 1,
            _ => 3,
        }
    }

    /// Short machine-readable tag used in the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::HypothesisViolation(_) => "HypothesisViolation",
            Error::Domain(_) => "DomainError",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::NoCrossing { .. } => "NoCrossing",
            Error::NoBracket(_) => "NoBracket",
            Error::PathTerminates(_) => "PathTerminates",
            Error::StepUnderflow(_) => "StepUnderflow",
            Error::BadBracket { .. } => "BadBracket",
            Error::UndecidedVerdict(_) => "UndecidedVerdict",
            Error::QuadratureNotConverged(_) => "QuadratureNotConverged",
            Error::UndecidedSpeed { .. } => "Undecided",
            Error::Parse { .. } => "ParseError",
            Error::Validation(_) => "ValidationError",
            Error::Mismatch(_) => "Mismatch",
            Error::Io(_) => "IoError",
        }
    }
}
