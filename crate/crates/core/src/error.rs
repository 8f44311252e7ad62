use thiserror::Error;

/// Errors produced by state construction, tomogram evaluation, and the checks
/// built on top of them.
///
/// Variants fall into two families: input errors (bad parameters, missing
/// phases, malformed files) and numerical errors (quadrature that fails to
/// converge, grids too coarse for the requested quantity). [`Error::is_numerical`]
/// tells them apart; the CLI maps the two families to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("phase {phase} is not available on the tomogram grid")]
    MissingPhase { phase: f64 },

    #[error("x = {x} lies outside the grid window [{x_min}, {x_max}]")]
    Extrapolation { x: f64, x_min: f64, x_max: f64 },

    #[error("need at least {required} samples at phase {phase}, found {count}")]
    InsufficientSamples { phase: f64, count: usize, required: usize },

    #[error(
        "quadrature did not converge for {context}: estimate changed by {change:e} after {refinements} refinements"
    )]
    NonConvergence {
        context: String,
        change: f64,
        refinements: usize,
    },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::Resolution(_) | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
