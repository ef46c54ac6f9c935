use super::geometry::{g_field, PatchGeometry};
use crate::error::Result;
use crate::numerics::{Axis, BoundaryField, GridField};

/// Which forcing to use for the second correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum A1Form {
    /// `ω₀∂φ𝚐 − ω₀Θ̇∂θ𝚐 − ¾∂θ(𝚐²)`: every ε⁴ term of the expansion.
    #[default]
    Full,
    /// `ω₀∂φ𝚐 − ¾∂θ(𝚐²)`, without the rotation term.
    WithoutRotation,
}

#[derive(Debug, Clone)]
pub struct ApproxSolution {
    pub g: GridField,
    pub r0: GridField,
    pub r1: GridField,
    pub a1: GridField,
    /// `r₀ + ε r₁`.
    pub r_eps: GridField,
}

/// Modes ±1 of the forcing below this size are treated as zero.
pub const MODE_ONE_TOL: f64 = 1e-12;

/// Builds `r_ε = r₀ + ε r₁` with `r₀ = 𝚐 + εB₀`, `B₀ = Σ_{k≥3} ((−1)^k/(k−1)) ε^{k−3} Re{a_k e^{ikθ}}`
/// and `r₁ = (∂θ − ℋ)^{−1}(−2εA₁)`.
pub fn approx_solution(eps: f64, geom: &PatchGeometry, n_theta: usize, k_max: usize, form: A1Form) -> Result<ApproxSolution> {
    let g = g_field(geom, n_theta);
    let mut r0 = g.clone();
    for k in 3..=k_max {
        let c = if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64 - 1.0) * eps.powi(k as i32 - 3);
        let m = geom.mode_field(k, n_theta, false);
        r0.data.iter_mut().zip(&m.data).for_each(|(r, v)| *r += eps * c * v);
    }

    let w0 = geom.orbit.omega0;
    let gs = g.to_spectral();
    let mut a1 = gs.derivative(Axis::Phi).scale(w0).sub(&gs.product(&gs).derivative(Axis::Theta).scale(0.75));
    if form == A1Form::Full {
        let rot = gs.derivative(Axis::Theta).scale_phi_slices(&geom.orbit.theta_dot).scale(w0);
        a1 = a1.sub(&rot);
    }
    let r1 = a1.scale(-2.0 * eps).invert_theta_elliptic(MODE_ONE_TOL)?;
    let r1 = r1.to_grid();
    let r_eps = r0.add(&r1.scale(eps));
    Ok(ApproxSolution { g, r0, r1, a1: a1.to_grid(), r_eps })
}

/// Leading part of the linearized functional at `r` in direction `h`:
/// `ε³ω₀∂φh + ε∂θ[(½ − (ε/2)r − ε²ω₀Θ̇ − (ε²/2)𝚐) h] − (ε/2)ℋh`.
pub fn linearization_leading_terms(eps: f64, r: &GridField, h: &GridField, geom: &PatchGeometry) -> GridField {
    let n_theta = r.n_theta;
    let g = g_field(geom, n_theta);
    let w0 = geom.orbit.omega0;
    let hs = BoundaryField::from_grid(h);
    let e2 = eps * eps;
    let mut coef = r.scale(-0.5 * eps).add(&g.scale(-0.5 * e2));
    for i in 0..r.n_phi {
        let shift = 0.5 - e2 * w0 * geom.orbit.theta_dot[i];
        coef.data[i * n_theta..(i + 1) * n_theta].iter_mut().for_each(|v| *v += shift);
    }
    let flux = coef.zip_map(h, |a, b| a * b).to_spectral().derivative(Axis::Theta).to_grid().scale(eps);
    hs.derivative(Axis::Phi)
        .to_grid()
        .scale(eps * e2 * w0)
        .add(&flux)
        .sub(&hs.hilbert().to_grid().scale(0.5 * eps))
}
