//! Symmetric quartet of point vortices in reduced coordinates.
//!
//! Two vortices of circulation π sit at `z₁, z₂` in the upper half plane and their
//! mirror images carry −π. With `η + iξ = z₁ − z₂` and `x₀ = Re(z₁ + z₂)` the motion
//! reduces to a planar Hamiltonian system in `(η, ξ)` plus a drift for `x₀`.

use crate::error::{Error, Result};
use crate::numerics::ode::{self, DenseSolution, OdeOptions};
use crate::numerics::{elliptic_e, elliptic_k, gauss_legendre};
use crate::par;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Physical configuration. `eps` is only used by the patch modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexParams {
    pub y0: f64,
    pub xi0: f64,
    pub eps: f64,
}

impl VortexParams {
    pub fn new(y0: f64, xi0: f64, eps: f64) -> Result<Self> {
        let p = VortexParams { y0, xi0, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y0.is_finite() && self.y0 > 0.0) {
            return Err(Error::InvalidParameter(format!("y0 must be positive, got {}", self.y0)));
        }
        if !(self.xi0 > 0.0 && self.xi0 < self.y0 / 2f64.sqrt()) {
            return Err(Error::InvalidParameter(format!(
                "xi0 must lie in (0, y0/sqrt 2) = (0, {:.6}), got {}",
                self.y0 / 2f64.sqrt(),
                self.xi0
            )));
        }
        if !(0.0..1.0).contains(&self.eps) {
            return Err(Error::InvalidParameter(format!("eps must lie in [0, 1), got {}", self.eps)));
        }
        Ok(())
    }

    pub fn alpha0(&self) -> f64 {
        self.xi0 * self.xi0 / (self.y0 * self.y0)
    }

    /// Level `e^{2H}` of the Hamiltonian on the orbit through `(0, ξ₀)`.
    pub fn h0(&self) -> f64 {
        let y2 = self.y0 * self.y0;
        y2 * (y2 / (self.xi0 * self.xi0) - 1.0)
    }

    pub fn with_xi0(&self, xi0: f64) -> Self {
        VortexParams { xi0, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub eta: f64,
    pub xi: f64,
    pub x0: f64,
    pub t: f64,
}

/// Squared separation and its polar angle (lifted), `η + iξ = √I e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionAngleState {
    pub action: f64,
    pub angle: f64,
}

impl ActionAngleState {
    /// `reference` picks the branch of the angle closest to it.
    pub fn from_pair(s: &PairState, reference: f64) -> Self {
        let raw = s.xi.atan2(s.eta);
        let k = ((reference - raw) / TAU).round();
        ActionAngleState { action: s.eta * s.eta + s.xi * s.xi, angle: raw + k * TAU }
    }
}

fn rhs_unchecked(y0: f64, eta: f64, xi: f64) -> [f64; 3] {
    let y2 = y0 * y0;
    let e2 = eta * eta;
    let x2 = xi * xi;
    let r2 = x2 + e2;
    [
        -xi * (y2 + e2) / (r2 * (y2 - x2)),
        eta * (y2 - x2) / (r2 * (y2 + e2)),
        y0 * (1.0 / (y2 + e2) + 1.0 / (y2 - x2)),
    ]
}

/// `(η̇, ξ̇, ẋ₀)` of the reduced system.
pub fn pair_rhs(state: &PairState, params: &VortexParams) -> Result<[f64; 3]> {
    let y2 = params.y0 * params.y0;
    if state.xi * state.xi >= y2 {
        return Err(Error::Singular(format!("xi^2 = {} >= y0^2", state.xi * state.xi)));
    }
    if state.eta == 0.0 && state.xi == 0.0 {
        return Err(Error::Singular("vortex collision (eta = xi = 0)".into()));
    }
    Ok(rhs_unchecked(params.y0, state.eta, state.xi))
}

/// `H = −½ log(1/(y₀² − ξ²) − 1/(y₀² + η²))`.
pub fn hamiltonian(eta: f64, xi: f64, y0: f64) -> Result<f64> {
    let y2 = y0 * y0;
    if xi * xi >= y2 {
        return Err(Error::InvalidParameter("hamiltonian needs xi^2 < y0^2".into()));
    }
    let arg = 1.0 / (y2 - xi * xi) - 1.0 / (y2 + eta * eta);
    if !(arg > 0.0) {
        return Err(Error::InvalidParameter(format!("hamiltonian log argument {arg} <= 0")));
    }
    Ok(-0.5 * arg.ln())
}

/// An integrated orbit with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: VortexParams,
    pub h_initial: f64,
    pub solution: DenseSolution<f64>,
}

impl Trajectory {
    pub fn state_at(&self, t: f64) -> PairState {
        let y = self.solution.eval(t);
        PairState { eta: y[0], xi: y[1], x0: y[2], t }
    }

    pub fn final_state(&self) -> PairState {
        let y = self.solution.final_state();
        PairState { eta: y[0], xi: y[1], x0: y[2], t: self.solution.t1 }
    }

    /// States at the accepted step boundaries.
    pub fn step_states(&self) -> Vec<PairState> {
        self.solution.step_times().into_iter().map(|t| self.state_at(t)).collect()
    }

    /// `n + 1` equally spaced samples over the integration span.
    pub fn sample(&self, n: usize) -> Vec<PairState> {
        let (a, b) = (self.solution.t0, self.solution.t1);
        (0..=n).map(|k| self.state_at(a + (b - a) * k as f64 / n as f64)).collect()
    }

    /// Largest relative Hamiltonian drift over the step boundaries.
    pub fn max_hamiltonian_drift(&self) -> f64 {
        self.step_states()
            .iter()
            .filter_map(|s| hamiltonian(s.eta, s.xi, self.params.y0).ok())
            .map(|h| ((h - self.h_initial) / self.h_initial).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates from `(η, ξ, x₀) = (0, ξ₀, 0)` to `t_end`.
pub fn integrate_orbit(params: &VortexParams, t_end: f64, tol: f64) -> Result<Trajectory> {
    params.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let y0 = params.y0;
    let f = move |_t: f64, s: &[f64], ds: &mut [f64]| {
        let d = rhs_unchecked(y0, s[0], s[1]);
        ds.copy_from_slice(&d);
    };
    let sol = ode::solve(f, 0.0, &[0.0, params.xi0, 0.0], t_end, &OdeOptions::with_tol(tol))?;
    let h_initial = hamiltonian(0.0, params.xi0, y0)?;
    Ok(Trajectory { params: *params, h_initial, solution: sol })
}

fn period_kernel(alpha: f64, s: f64) -> f64 {
    let b = 1.0 - 2.0 * alpha;
    (1.0 - alpha) * (b + alpha * s).powi(2) / (b * (b + alpha * alpha * s).powf(1.5))
}

/// Period by quadrature of the reduced energy relation, substituting `s = sin u`.
pub fn period_quadrature(params: &VortexParams) -> Result<f64> {
    params.validate()?;
    let alpha = params.alpha0();
    let (x, w) = gauss_legendre(128);
    let sum: f64 = x
        .iter()
        .zip(&w)
        .map(|(&t, &wt)| {
            let u = FRAC_PI_2 * 0.5 * (t + 1.0);
            let s = u.sin();
            wt * period_kernel(alpha, s * s)
        })
        .sum();
    Ok(4.0 * params.xi0 * params.xi0 * sum * FRAC_PI_2 * 0.5)
}

/// Closed form in complete elliptic integrals, without the self-check.
///
/// The argument `α₀/(1−α₀)` is a modulus `k`, so K and E are called with `m = k²`.
pub fn period_closed_form_raw(params: &VortexParams) -> Result<f64> {
    params.validate()?;
    let a = params.alpha0();
    let k = a / (1.0 - a);
    let m = k * k;
    let (kk, ee) = (elliptic_k(m)?, elliptic_e(m)?);
    let pre = 8.0 * params.xi0 * params.xi0 * (1.0 - a) / (1.0 - 2.0 * a);
    Ok(pre * ((1.0 - a).powi(2) / (a * a) * ee - (1.0 - 2.0 * a) / (a * a) * kk))
}

/// Closed form, checked against [`period_quadrature`] to 1e−8 relative.
pub fn period_closed_form(params: &VortexParams) -> Result<f64> {
    let t = period_closed_form_raw(params)?;
    let tq = period_quadrature(params)?;
    let rel = ((t - tq) / tq).abs();
    if rel > 1e-8 {
        return Err(Error::SelfCheck(format!("elliptic period differs from quadrature by {rel:e} (relative)")));
    }
    Ok(t)
}

/// Lower and upper bounds `2πξ₀² ≤ T ≤ 2πξ₀²/(1−2α₀)`.
pub fn period_bounds(params: &VortexParams) -> (f64, f64) {
    let lo = TAU * params.xi0 * params.xi0;
    (lo, lo / (1.0 - 2.0 * params.alpha0()))
}

/// Period as four times the first zero of ξ(t), found by event detection.
pub fn period_numeric(params: &VortexParams, tol: f64) -> Result<f64> {
    params.validate()?;
    let y0 = params.y0;
    let f = move |_t: f64, s: &[f64], ds: &mut [f64]| {
        let d = rhs_unchecked(y0, s[0], s[1]);
        ds.copy_from_slice(&d);
    };
    let horizon = period_bounds(params).1;
    let (_, te) =
        ode::solve_until_event(f, 0.0, &[0.0, params.xi0, 0.0], horizon, &OdeOptions::with_tol(tol), |_, s| s[1], 1e-13)?;
    te.map(|t| 4.0 * t).ok_or(Error::EventNotFound(horizon))
}

/// `ω₀ = 2π / T`.
pub fn frequency(params: &VortexParams) -> Result<f64> {
    Ok(TAU / period_quadrature(params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub xi0: f64,
    pub period: f64,
    pub omega0: f64,
    pub domega: f64,
}

/// Central-difference step for dω₀/dξ₀, in units of y₀.
pub const DOMEGA_STEP: f64 = 1e-4;

/// ω₀ and its derivative over a list of ξ₀ values (evaluated in parallel).
pub fn frequency_profile(y0: f64, xi0s: &[f64]) -> Result<Vec<FrequencyRow>> {
    let h = DOMEGA_STEP * y0;
    par::map_slice(xi0s, |&xi0| {
        let p = VortexParams::new(y0, xi0, 0.0)?;
        let lo = VortexParams::new(y0, xi0 - h, 0.0)?;
        let hi = VortexParams::new(y0, xi0 + h, 0.0)?;
        let period = period_quadrature(&p)?;
        let domega = (frequency(&hi)? - frequency(&lo)?) / (2.0 * h);
        Ok(FrequencyRow { xi0, period, omega0: TAU / period, domega })
    })
    .into_iter()
    .collect()
}

/// Positive root of the quarter-period relation, `|η(T/4)| = ξ₀y₀/√(y₀² − 2ξ₀²)`.
pub fn eta_quarter(params: &VortexParams) -> Result<f64> {
    let a = params.alpha0();
    if !(a < 0.5) || params.xi0 <= 0.0 {
        return Err(Error::InvalidParameter("eta_quarter needs 0 < alpha0 < 1/2".into()));
    }
    let y2 = params.y0 * params.y0;
    Ok(params.xi0 * params.y0 / (y2 - 2.0 * params.xi0 * params.xi0).sqrt())
}

/// Right-hand side of the `(q, Θ)` system in the rescaled time `φ = ω₀t`.
pub fn q_theta_rhs(q: f64, th: f64, y0: f64, omega0: f64) -> (f64, f64) {
    let y2 = y0 * y0;
    let (s, c) = th.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let dq = -(1.0 / (y2 - q * s2) + 1.0 / (y2 + q * c2)) * (2.0 * s * c) * q / omega0;
    let dth = (1.0 / q + s2 / (y2 - q * s2) - c2 / (y2 + q * c2)) / omega0;
    (dq, dth)
}

/// Periodic polar representation `η + iξ = √q e^{iΘ}` sampled on a uniform φ grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarOrbit {
    pub y0: f64,
    pub xi0: f64,
    pub n_phi: usize,
    pub q: Vec<f64>,
    pub theta_big: Vec<f64>,
    pub theta_dot: Vec<f64>,
    pub omega0: f64,
    pub period: f64,
    /// Θ(2π) − Θ(0) − 2π from the integration.
    pub closure_gap: f64,
    /// max |q(φ+π) − q(φ)| and max |Θ(φ+π) − Θ(φ) − π| over the grid.
    pub symmetry_gap: f64,
}

impl PolarOrbit {
    pub fn phi(&self, k: usize) -> f64 {
        TAU * k as f64 / self.n_phi as f64
    }

    /// Index of φ + π.
    pub fn shifted(&self, k: usize) -> usize {
        (k + self.n_phi / 2) % self.n_phi
    }
}

const Q_THETA_TOL: f64 = 1e-13;

/// Integrates the `(q, Θ)` system over one period of φ.
pub fn solve_q_theta(params: &VortexParams, n_phi: usize) -> Result<PolarOrbit> {
    params.validate()?;
    if n_phi < 64 || !n_phi.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("n_phi must be a power of two >= 64, got {n_phi}")));
    }
    let period = period_quadrature(params)?;
    let omega0 = TAU / period;
    let y0 = params.y0;
    let f = move |_p: f64, s: &[f64], ds: &mut [f64]| {
        let (a, b) = q_theta_rhs(s[0], s[1], y0, omega0);
        ds[0] = a;
        ds[1] = b;
    };
    let sol = ode::solve(f, 0.0, &[params.xi0 * params.xi0, FRAC_PI_2], TAU, &OdeOptions::with_tol(Q_THETA_TOL))?;
    let closure_gap = sol.final_state()[1] - FRAC_PI_2 - TAU;
    let q_gap = sol.final_state()[0] - params.xi0 * params.xi0;
    if closure_gap.abs() > 1e-8 || q_gap.abs() > 1e-8 {
        return Err(Error::SelfCheck(format!("(q, Theta) orbit does not close: dTheta = {closure_gap:e}, dq = {q_gap:e}")));
    }
    let mut q = Vec::with_capacity(n_phi);
    let mut th = Vec::with_capacity(n_phi);
    let mut thd = Vec::with_capacity(n_phi);
    for k in 0..n_phi {
        let y = sol.eval(TAU * k as f64 / n_phi as f64);
        if !(y[0] > 0.0) {
            return Err(Error::Singular("q(phi) <= 0".into()));
        }
        q.push(y[0]);
        th.push(y[1]);
        thd.push(q_theta_rhs(y[0], y[1], y0, omega0).1);
    }
    // exact values at φ = 0
    q[0] = params.xi0 * params.xi0;
    th[0] = FRAC_PI_2;
    thd[0] = q_theta_rhs(q[0], th[0], y0, omega0).1;
    let half = n_phi / 2;
    let mut symmetry_gap: f64 = 0.0;
    for k in 0..half {
        symmetry_gap = symmetry_gap.max((q[k + half] - q[k]).abs()).max((th[k + half] - th[k] - PI).abs());
    }
    Ok(PolarOrbit {
        y0,
        xi0: params.xi0,
        n_phi,
        q,
        theta_big: th,
        theta_dot: thd,
        omega0,
        period,
        closure_gap,
        symmetry_gap,
    })
}

/// Bound `6π/(y₀²(1−2α₀))·e^{6πα₀/(1−2α₀)}` on the deviation of the polar orbit from
/// uniform rotation.
pub fn polar_deviation_bound(params: &VortexParams) -> f64 {
    let a = params.alpha0();
    let b = 1.0 - 2.0 * a;
    6.0 * PI / (params.y0 * params.y0 * b) * (6.0 * PI * a / b).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhs_at_vertical_configuration() {
        let p = VortexParams::new(1.0, 0.5, 0.0).unwrap();
        let d = pair_rhs(&PairState { eta: 0.0, xi: 0.5, x0: 0.0, t: 0.0 }, &p).unwrap();
        assert!((d[0] + 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(d[1], 0.0);
    }

    #[test]
    fn collision_is_singular() {
        let p = VortexParams::new(1.0, 0.5, 0.0).unwrap();
        assert!(pair_rhs(&PairState { eta: 0.0, xi: 0.0, x0: 0.0, t: 0.0 }, &p).is_err());
        assert!(pair_rhs(&PairState { eta: 0.1, xi: 1.0, x0: 0.0, t: 0.0 }, &p).is_err());
    }

    #[test]
    fn params_reject_degenerate_xi0() {
        assert!(VortexParams::new(1.0, 0.71, 0.0).is_err());
        assert!(VortexParams::new(1.0, 0.0, 0.0).is_err());
        assert!(VortexParams::new(-1.0, 0.1, 0.0).is_err());
        assert!(VortexParams::new(1.0, 0.1, 1.0).is_err());
    }
}
