//! Numerical laboratory for leapfrogging quartets of vortices.
//!
//! The crate is split into four layers:
//!
//! * [`numerics`]: ODE engine, elliptic integrals, quadrature and spectral calculus on the torus.
//! * [`pointvortex`]: the reduced four-vortex system, its period and the polar orbit `(q, Θ)`.
//! * [`contour`]: the boundary functional `G(r)` for desingularized patches, the approximate
//!   solution `r_ε` and a lab-frame contour-dynamics simulator.
//! * [`monodromy`]: the 4×4 system of the degenerate ±1 modes, its fundamental matrix,
//!   the singular-set scan and Diophantine Cantor-set sampling.
//!
//! Scans over parameters run on rayon when the `parallel` feature is on (the default).
//! See [`par`] for the sequential fallback.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod error;
pub mod monodromy;
pub mod numerics;
pub mod par;
pub mod pointvortex;
pub mod verify;

pub use error::{Error, Result};
pub use pointvortex::VortexParams;
