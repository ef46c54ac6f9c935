//! Shared numerical kernels.

pub mod elliptic;
pub mod ode;
pub mod quadrature;
pub mod spectral;

pub use elliptic::{elliptic_e, elliptic_k};
pub use ode::{DenseSolution, OdeOptions, OdeScalar};
pub use quadrature::gauss_legendre;
pub use spectral::{Axis, BoundaryField, GridField};
