//! Desingularized patches around the point-vortex orbit.
//!
//! The boundary of the first patch is written in the co-rotating polar form
//! `e^{iΘ(φ)} √(1 + 2εr(φ,θ)) e^{iθ}` and [`g_residual`] evaluates the functional
//! whose zeros are exact time-periodic patch motions.

mod approx;
mod geometry;
mod psi;
pub mod simulate;

pub use approx::{approx_solution, linearization_leading_terms, A1Form, ApproxSolution};
pub use geometry::{g0_series, g_field, PatchGeometry, SeriesField};
pub use psi::{g_residual, psi_eval, psi_sum, PsiQuadrature};
pub use simulate::{patch_diagnostics, simulate_patches, PatchBoundarySet, SimulationConfig, SimulationReport};
