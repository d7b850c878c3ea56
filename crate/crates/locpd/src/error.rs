use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown function id `{0}`")]
    UnknownId(String),
    #[error("x = {x} lies outside the domain (-{half_width}, {half_width}) of {id}")]
    Domain { id: String, x: f64, half_width: f64 },
    #[error("point {0} is outside the admissible interval")]
    PointOutside(f64),
    #[error("points must be distinct and sorted (offending index {0})")]
    PointOrder(usize),
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("functions live on different groups")]
    GroupMismatch,
    #[error("quadrature resolution insufficient: {0}")]
    Resolution(String),
    #[error("series did not converge: {0}")]
    Convergence(String),
    #[error("cannot build extension: {0}")]
    Construction(String),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
