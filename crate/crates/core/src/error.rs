use thiserror::Error;

/// Failure while evaluating a field at a single point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("degenerate metric: |det g| = {det:e} below floor")]
    DegenerateMetric { det: f64 },
    #[error("degenerate Poisson tensor: |det π| = {det:e} below floor")]
    DegeneratePoisson { det: f64 },
    #[error("singular matrix")]
    Singular,
    #[error("expected {expected} components, got {got}")]
    Shape { expected: usize, got: usize },
}

/// Expression syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed at {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("point {0:?} lies outside the chart domain")]
    OutsideDomain(Vec<f64>),
    #[error("index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("anchor condition violated at t = {t}: residual {residual:e}")]
    AnchorViolation { t: f64, residual: f64 },
    #[error("vector field is not Killing: residual {residual:e} exceeds {tol:e}")]
    NotKilling { residual: f64, tol: f64 },
    #[error("form is not ad-invariant: {0}")]
    NotInvariant(String),
    #[error("invalid Lie algebra: {0}")]
    InvalidAlgebra(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(point: &[f64], source: EvalError) -> Self {
        Error::Eval {
            point: point.to_vec(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
