use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the trajectory, density and scenario layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {x} lies within {distance:.3e} of a wavefunction node (guard {guard:.3e})")]
    NodeProximity {
        x: Complex64,
        distance: f64,
        guard: f64,
    },

    #[error("velocity field vanishes at {x}")]
    StationaryPoint { x: Complex64 },

    #[error("alternative velocity form is degenerate at {x}: {reason}")]
    DegeneratePoint { x: Complex64, reason: &'static str },

    #[error("integration step failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("open trajectory from {x0} did not complete its horizon")]
    HorizonExceeded { x0: Complex64 },

    #[error("grid point {x} lies within {distance:.3e} of a real-axis node")]
    NodeOnGrid { x: f64, distance: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no closed-form extended density is catalogued for {0}")]
    UnsupportedState(String),

    #[error("finite-difference stencil around {x} touches a point masked {mask}")]
    MaskViolation { x: Complex64, mask: &'static str },

    #[error("the path through {x0} does not yield a consistent boundary value ({verdict})")]
    Verdict {
        x0: Complex64,
        verdict: &'static str,
    },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Wraps the error with the seed or point it arose at.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Validation and parse failures exit with 1, numerical failures with 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Context { source, .. } => source.exit_code(),
            Error::Parse { .. } | Error::Validation(_) | Error::InvalidGrid(_) => 1,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
