//! KdV solutions with step-like initial data from one-sided scattering data,
//! through Fredholm determinants of Hankel operators.

pub mod determinant;
pub mod error;
pub mod hankel;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod oracles;
pub mod potential;
pub mod quadrature;
pub mod scalar;
pub mod scattering;

pub use error::{Error, Result};
pub use potential::{AdmissibilityReport, Potential, Profile, Side};
pub use scalar::Real;

/// Double-precision matrix used by the pipeline.
pub type Matrix64 = linalg::Matrix<f64>;
/// Double-precision Gauss–Legendre rule.
pub type GaussLegendre64 = quadrature::GaussLegendre<f64>;
