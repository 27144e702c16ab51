use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is rank deficient at column {0}")]
    RankDeficient(usize),
    #[error("matrix is not positive definite (failed at row {0})")]
    NotPositiveDefinite(usize),
    #[error("invalid gluing: {0}")]
    GluingInvalid(String),
    #[error("deck group relation violated: residual {0:e}")]
    RelationViolated(f64),
    #[error("curves are not transverse: {0}")]
    NonTransverse(String),
    #[error("point not found within tiling depth {0}")]
    NotFound(usize),
    #[error("a-period normalization matrix is singular")]
    SingularNormalization,
    #[error("no generic theta shift found after {0} attempts")]
    GenericityFailed(usize),
    #[error("evaluation point coincides with a pole")]
    PoleHit,
    #[error("pole is numerically a Weierstrass point (sigma_min ratio {0:e})")]
    IllConditionedPole(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
