use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("domain is not strictly star-shaped about its centre (min x.n = {0})")]
    NonStarShaped(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no admissible alpha for dimension {0}")]
    NoAdmissibleAlpha(usize),

    #[error("mesh size h = {h} does not divide extent {extent}")]
    IncompatibleMesh { h: f64, extent: f64 },

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("normal matrix is numerically singular")]
    SingularSystem,

    #[error("training diverged at iteration {iteration} (loss {loss:e})")]
    Diverged { iteration: usize, loss: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
