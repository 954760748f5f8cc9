use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller violated an inter-object contract (e.g. a state solved for a different material).
    #[error("contract error: {0}")]
    Contract(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("negative eigenvalue {eigenvalue:.6e} below clamp -{clamp:.3e}{context}")]
    Instability {
        eigenvalue: f64,
        clamp: f64,
        context: String,
    },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("root bracketing failed: {0}")]
    Root(String),

    #[error("dispersion coverage error: {0}")]
    Coverage(String),

    #[error("extraction failed: {0}")]
    Extraction(String),

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
