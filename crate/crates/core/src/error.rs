use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pair integration failed: {0}")]
    PairIntegration(String),

    #[error("degenerate sector fan: {0}")]
    DegenerateFan(String),

    #[error("field model rejected: {0}")]
    FieldModel(String),

    #[error("mesh quality: {0}")]
    MeshQuality(String),

    #[error("quadrature failure on triangle {triangle}: jacobian {jacobian:e}")]
    QuadratureFailure { triangle: usize, jacobian: f64 },

    #[error("linear solver failed: {0}")]
    Factorization(String),

    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("point ({x}, {y}) lies outside the mesh")]
    PointOutsideDomain { x: f64, y: f64 },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Configuration problems are reported differently from numerical ones by the CLI.
    pub fn is_config(&self) -> bool {
        match self {
            Error::ConfigInvalid(_) => true,
            Error::Stage { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
