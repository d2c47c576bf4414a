use std::fmt;

use thiserror::Error;

/// Position-carrying parse failure for the expression language.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at byte {position}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

/// Floating point evaluation left the domain of a subexpression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{reason} in `{subexpr}`")]
pub struct EvalError {
    pub subexpr: String,
    pub reason: String,
}

/// A point is too close to the boundary for the requested computation.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginViolation {
    /// Exact point, `(p/q, ...)`.
    pub point: String,
    pub hbar: f64,
    pub slack: f64,
    pub required: f64,
}

impl fmt::Display for MarginViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "point {} at hbar={} has slack {:.3e}, needs more than {:.3e}",
            self.point, self.hbar, self.slack, self.required
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("arrows are not composable: {0}")]
    NotComposable(String),
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error("evaluation error for mode {mode:?}: {source}")]
    ModeEval { mode: Vec<i64>, source: EvalError },
    #[error("evaluation error at orbit point {point:?}: {source}")]
    OrbitEval { point: Vec<String>, source: EvalError },
    #[error("mode {mode:?} is not admissible on the stratum with active facets {active:?}")]
    Stratum { mode: Vec<i64>, active: Vec<usize> },
    #[error("margin error: {0}")]
    Margin(MarginViolation),
    #[error("aliasing: grid of {grid} points cannot resolve modes up to |k| = {max_mode}")]
    Aliasing { grid: usize, max_mode: i64 },
    #[error("construction error: {0}")]
    Construction(String),
    #[error("orbit exceeded the cap of {cap} points (noncompact or degenerate input?)")]
    CapExceeded { cap: usize },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
