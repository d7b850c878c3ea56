//! Numerical toolkit for continuous positive definite functions given only on
//! a bounded interval: Gram and Mercer spectra, reproducing kernel norms and
//! membership, deficiency classification, Polya spline extensions, Shannon
//! sampling checks and Monte-Carlo covariance checks.

pub mod catalog;
pub mod error;
pub mod extension;
pub mod gp;
pub mod linalg;
pub mod measures;
pub mod mercer;
pub mod pl;
pub mod quadrature;
pub mod rkhs;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
