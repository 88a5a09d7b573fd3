use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("line through two coincident points")]
    DegenerateLine,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HullError {
    /// The point lies strictly inside the hull. The hull is left unchanged,
    /// which is still `conv(K ∪ {p})`, but in a walk this signals a bug.
    #[error("point ({x}, {y}) lies strictly inside the hull")]
    InteriorInsertion { x: f64, y: f64 },
    #[error("point ({x}, {y}) is not on the hull boundary")]
    NotOnBoundary { x: f64, y: f64 },
    #[error("non-finite point")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Hull(#[from] HullError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("adaptive quadrature did not reach {tol:e} (estimated error {err:e})")]
    Failure { tol: f64, err: f64 },
    #[error("invalid drift arguments: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("A_i events need a rejection-mode trajectory")]
    ModeMismatch,
    #[error("degenerate lens frame at epoch {epoch}, step {step}")]
    DegenerateFrame { epoch: usize, step: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Hull(#[from] HullError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("A_i statistics need rejection mode")]
    ModeMismatch,
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("{path}: {msg}")]
    Header { path: String, msg: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{origin}: line {line}: {msg}")]
    Syntax { origin: String, line: usize, msg: String },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: String, key: String },
    #[error("invalid value for {key}: {msg}")]
    Invalid { key: String, msg: String },
}
