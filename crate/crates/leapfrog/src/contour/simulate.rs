//! Lab-frame contour dynamics for the four patches.
//!
//! Only the two upper boundaries are stored. The lower patches are their mirror images
//! with opposite vorticity, so their velocity contribution at `z` is the conjugate
//! velocity of the upper patch evaluated at `z̄`.
//!
//! For a patch `D` of uniform vorticity `ω` the conjugate velocity is
//! `ū(z) = (ω/4π) ∮ (ζ̄ − z̄)/(ζ − z) dζ`. The integrand stays bounded when `z` is on
//! the contour, so the periodic trapezoid rule is spectrally accurate for self-induced
//! velocities as well.

use crate::error::{Error, Result};
use crate::numerics::spectral::{fft_forward, fft_inverse, freq, node, TrigInterpolant};
use crate::numerics::GridField;
use crate::pointvortex::{integrate_orbit, PolarOrbit, VortexParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Lab,
    Translating,
}

/// Boundaries of the four patches at one instant. Index 0, 1 are the upper patches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchBoundarySet {
    pub t: f64,
    pub frame: Frame,
    pub gamma: [Vec<Complex64>; 4],
}

impl PatchBoundarySet {
    fn from_upper(t: f64, upper: &[Vec<Complex64>; 2]) -> Self {
        let mirror = |b: &Vec<Complex64>| b.iter().rev().map(|z| z.conj()).collect::<Vec<_>>();
        PatchBoundarySet {
            t,
            frame: Frame::Lab,
            gamma: [upper[0].clone(), upper[1].clone(), mirror(&upper[0]), mirror(&upper[1])],
        }
    }

    /// Same boundaries shifted by `−x₀(t)/2` horizontally.
    pub fn translated(&self, x0: f64) -> Self {
        let shift = Complex64::new(-0.5 * x0, 0.0);
        let mut out = self.clone();
        out.frame = Frame::Translating;
        out.gamma.iter_mut().for_each(|b| b.iter_mut().for_each(|z| *z += shift));
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub t_end: f64,
    /// Fraction of (smallest node spacing / largest speed) used as the time step.
    pub cfl: f64,
    pub dt_max: f64,
    pub redistribute_every: usize,
    /// Number of boundary snapshots kept (evenly spaced in time, endpoints included).
    pub snapshots: usize,
    /// Abort when a patch area drifts by more than this fraction.
    pub max_area_drift: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { t_end: 1.0, cfl: 0.5, dt_max: 2e-3, redistribute_every: 10, snapshots: 9, max_area_drift: 0.01 }
    }
}

/// Per-step history and boundary snapshots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub eps: f64,
    pub params: VortexParams,
    pub period: f64,
    pub times: Vec<f64>,
    pub centroids: Vec<[Complex64; 2]>,
    pub areas: Vec<[f64; 2]>,
    pub snapshots: Vec<PatchBoundarySet>,
    pub steps: usize,
}

impl SimulationReport {
    /// Largest |A(t)/A(0) − 1| over both upper patches.
    pub fn max_area_drift(&self) -> f64 {
        let a0 = self.areas[0];
        self.areas
            .iter()
            .flat_map(|a| [(a[0] / a0[0] - 1.0).abs(), (a[1] / a0[1] - 1.0).abs()])
            .fold(0.0, f64::max)
    }

    /// Sign changes of `Re(c₁ − c₂)` with times (linear interpolation) inside `[t_a, t_b]`.
    pub fn x_gap_crossings(&self, t_a: f64, t_b: f64) -> Vec<f64> {
        let gap: Vec<f64> = self.centroids.iter().map(|c| (c[0] - c[1]).re).collect();
        let mut out = Vec::new();
        for k in 1..gap.len() {
            let (ta, tb) = (self.times[k - 1], self.times[k]);
            if tb < t_a || ta > t_b {
                continue;
            }
            if gap[k - 1] != 0.0 && gap[k - 1].signum() != gap[k].signum() {
                let tc = ta + (tb - ta) * gap[k - 1] / (gap[k - 1] - gap[k]);
                if tc >= t_a && tc <= t_b {
                    out.push(tc);
                }
            }
        }
        out
    }
}

fn derivative_c(z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    let mut c = z.to_vec();
    fft_forward(&mut c);
    for (k, v) in c.iter_mut().enumerate() {
        *v = if n.is_multiple_of(2) && k == n / 2 { Complex64::new(0.0, 0.0) } else { *v * Complex64::new(0.0, freq(k, n) as f64) };
    }
    fft_inverse(&mut c);
    c
}

/// Enclosed area `½∮ Im(z̄ dz)`.
pub fn area(z: &[Complex64]) -> f64 {
    let dz = derivative_c(z);
    let n = z.len() as f64;
    0.5 * z.iter().zip(&dz).map(|(a, b)| (a.conj() * b).im).sum::<f64>() * TAU / n
}

/// Area centroid `(1/(2iA))∮ z z̄ dz`.
pub fn centroid(z: &[Complex64]) -> Complex64 {
    let dz = derivative_c(z);
    let n = z.len() as f64;
    let s: Complex64 = z.iter().zip(&dz).map(|(a, b)| a * a.conj() * b).sum::<Complex64>() * (TAU / n);
    s / (Complex64::new(0.0, 2.0) * area(z))
}

/// Complex Fourier coefficients `c_k`, k = 0..k_max, of the radius `ρ(α)` of a star-shaped
/// curve about `center`, scaled by `1/scale`.
pub fn radial_modes(z: &[Complex64], center: Complex64, scale: f64, k_max: usize) -> Vec<Complex64> {
    let p: Vec<Complex64> = z.iter().map(|v| (v - center) / scale).collect();
    let dp = derivative_c(&p);
    let n = p.len() as f64;
    (0..=k_max)
        .map(|k| {
            let mut s = Complex64::new(0.0, 0.0);
            for (a, b) in p.iter().zip(&dp) {
                let dalpha = (b / a).im;
                s += Complex64::from_polar(a.norm(), -(k as f64) * a.arg()) * dalpha;
            }
            s / n
        })
        .collect()
}

/// Conjugate velocity induced at `x` by a patch with boundary nodes `zeta` (derivatives `dzeta`)
/// and vorticity `omega`.
fn conj_velocity(x: Complex64, zeta: &[Complex64], dzeta: &[Complex64], omega: f64) -> Complex64 {
    let n = zeta.len();
    let mut s = Complex64::new(0.0, 0.0);
    for m in 0..n {
        let d = zeta[m] - x;
        if d.norm_sqr() < 1e-28 {
            s += dzeta[m].conj();
        } else {
            s += d.conj() / d * dzeta[m];
        }
    }
    s * (omega / (4.0 * PI) * TAU / n as f64)
}

fn velocities(upper: &[Vec<Complex64>; 2], omega: f64) -> [Vec<Complex64>; 2] {
    let d = [derivative_c(&upper[0]), derivative_c(&upper[1])];
    let eval = |x: Complex64| {
        let mut u = Complex64::new(0.0, 0.0);
        for p in 0..2 {
            u += conj_velocity(x, &upper[p], &d[p], omega).conj();
            u += conj_velocity(x.conj(), &upper[p], &d[p], omega);
        }
        u
    };
    let v0 = crate::par::map_slice(&upper[0], |&x| eval(x));
    let v1 = crate::par::map_slice(&upper[1], |&x| eval(x));
    [v0, v1]
}

/// Redistributes nodes to equal arclength spacing, keeping node 0 fixed.
fn redistribute(z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    let dz = derivative_c(z);
    let speed: Vec<f64> = dz.iter().map(|v| v.norm()).collect();
    let mut sc: Vec<Complex64> = speed.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut sc);
    let mean = sc[0].re;
    let total = mean * TAU;
    // s(η) = mean·η + Σ_{k≠0} c_k (e^{ikη} − 1)/(ik)
    let s_of = |eta: f64| -> f64 {
        let mut s = mean * eta;
        for (k, c) in sc.iter().enumerate().skip(1) {
            if n.is_multiple_of(2) && k == n / 2 {
                continue;
            }
            let f = freq(k, n) as f64;
            let e = Complex64::from_polar(1.0, f * eta) - 1.0;
            s += (c * e / Complex64::new(0.0, f)).re;
        }
        s
    };
    let speed_interp = TrigInterpolant::new(&speed.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
    let zi = TrigInterpolant::new(z);
    let mut out = Vec::with_capacity(n);
    let mut eta = 0.0;
    for k in 0..n {
        let target = total * k as f64 / n as f64;
        for _ in 0..30 {
            let f = s_of(eta) - target;
            let df = speed_interp.eval(eta).re.max(1e-12);
            let step = f / df;
            eta -= step;
            if step.abs() < 1e-14 {
                break;
            }
        }
        out.push(zi.eval(eta));
        eta += TAU / n as f64;
    }
    out
}

fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let cross = |o: Complex64, p: Complex64, q: Complex64| (p - o).re * (q - o).im - (p - o).im * (q - o).re;
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// True if the closed polygon through the nodes crosses itself.
pub fn self_intersects(z: &[Complex64]) -> bool {
    let n = z.len();
    for i in 0..n {
        let (a, b) = (z[i], z[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(a, b, z[j], z[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

fn min_spacing(z: &[Complex64]) -> f64 {
    let n = z.len();
    (0..n).map(|i| (z[(i + 1) % n] - z[i]).norm()).fold(f64::INFINITY, f64::min)
}

/// Evolves the two upper patches from boundaries built out of `r_init`.
///
/// The initial boundary of patch 1 is `ε e^{iΘ(0)} √(1 + 2εr(0,θ)) e^{iθ} + z₁(0)` and patch 2
/// uses the slice φ = π (half a period later), centred at `z₂(0)`.
pub fn simulate_patches(
    params: &VortexParams,
    orbit: &PolarOrbit,
    r_init: &GridField,
    config: &SimulationConfig,
) -> Result<SimulationReport> {
    params.validate()?;
    let eps = params.eps;
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("simulation needs eps > 0".into()));
    }
    if r_init.n_phi != orbit.n_phi {
        return Err(Error::InvalidParameter("r_init and orbit grids differ".into()));
    }
    let nt = r_init.n_theta;
    let (xi0, y0) = (params.xi0, params.y0);
    let z1 = Complex64::new(0.0, 0.5 * (y0 + xi0));
    let z2 = Complex64::new(0.0, 0.5 * (y0 - xi0));
    let build = |row: usize, center: Complex64| -> Result<Vec<Complex64>> {
        let rot = Complex64::from_polar(1.0, orbit.theta_big[row]);
        (0..nt)
            .map(|j| {
                let s = 1.0 + 2.0 * eps * r_init.at(row, j);
                if s <= 0.0 {
                    return Err(Error::InvalidParameter("radius positivity fails in r_init".into()));
                }
                Ok(center + rot * Complex64::from_polar(eps * s.sqrt(), node(j, nt)))
            })
            .collect()
    };
    let mut upper = [build(0, z1)?, build(orbit.n_phi / 2, z2)?];
    let omega = 1.0 / (eps * eps);

    let a0 = [area(&upper[0]), area(&upper[1])];
    let mut report = SimulationReport {
        eps,
        params: *params,
        period: orbit.period,
        times: vec![0.0],
        centroids: vec![[centroid(&upper[0]), centroid(&upper[1])]],
        areas: vec![a0],
        snapshots: vec![PatchBoundarySet::from_upper(0.0, &upper)],
        steps: 0,
    };
    let n_snap = config.snapshots.max(2);
    let mut next_snap = 1;
    let snap_time = |k: usize| config.t_end * k as f64 / (n_snap - 1) as f64;

    let mut t = 0.0;
    let mut step = 0usize;
    while t < config.t_end - 1e-14 {
        let v = velocities(&upper, omega);
        let umax = v.iter().flatten().map(|u| u.norm()).fold(0.0, f64::max);
        let hmin = min_spacing(&upper[0]).min(min_spacing(&upper[1]));
        let mut dt = (config.cfl * hmin / umax.max(1e-12)).min(config.dt_max);
        let t_snap = snap_time(next_snap);
        if t + dt > t_snap {
            dt = t_snap - t;
        }
        // classical RK4 using the velocity already computed as the first stage
        let add = |b: &[Vec<Complex64>; 2], k: &[Vec<Complex64>; 2], h: f64| -> [Vec<Complex64>; 2] {
            [0, 1].map(|p| b[p].iter().zip(&k[p]).map(|(z, u)| z + u * h).collect())
        };
        let k1 = v;
        let k2 = velocities(&add(&upper, &k1, 0.5 * dt), omega);
        let k3 = velocities(&add(&upper, &k2, 0.5 * dt), omega);
        let k4 = velocities(&add(&upper, &k3, dt), omega);
        for p in 0..2 {
            for m in 0..nt {
                upper[p][m] += (k1[p][m] + (k2[p][m] + k3[p][m]) * 2.0 + k4[p][m]) * (dt / 6.0);
            }
        }
        t += dt;
        step += 1;
        if step.is_multiple_of(config.redistribute_every.max(1)) {
            upper = [redistribute(&upper[0]), redistribute(&upper[1])];
            for (p, b) in upper.iter().enumerate() {
                if self_intersects(b) {
                    return Err(Error::Simulation(format!("boundary {} self-intersects at t = {t:.6}", p + 1)));
                }
            }
        }
        let a = [area(&upper[0]), area(&upper[1])];
        for p in 0..2 {
            let drift = (a[p] / a0[p] - 1.0).abs();
            if drift > config.max_area_drift {
                return Err(Error::Simulation(format!("area of patch {} drifted by {drift:.3e} at t = {t:.6}", p + 1)));
            }
        }
        if upper.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Simulation(format!("non-finite boundary at t = {t:.6}")));
        }
        report.times.push(t);
        report.centroids.push([centroid(&upper[0]), centroid(&upper[1])]);
        report.areas.push(a);
        if (t - t_snap).abs() < 1e-12 {
            report.snapshots.push(PatchBoundarySet::from_upper(t, &upper));
            next_snap += 1;
        }
    }
    report.steps = step;
    Ok(report)
}

/// Per-snapshot comparison against the point-vortex motion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    pub t: f64,
    pub centroid: [Complex64; 2],
    pub point_vortex: [Complex64; 2],
    pub centroid_error: f64,
    pub area_drift: [f64; 2],
    /// |c_k| of the radius of patch 1 about its centroid, in units of ε, k = 0..8.
    pub modes: Vec<f64>,
    /// `ε²|a₂(ω₀t)|/2`, the predicted size of the mode-2 coefficient.
    pub mode2_prediction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub snapshots: Vec<SnapshotDiagnostics>,
    /// Largest centroid error of patch 1 over every recorded step.
    pub max_centroid_error: f64,
    pub max_area_drift: f64,
}

/// Compares a simulation with the point-vortex orbit; `a2` gives `a₂(φ)` on the orbit grid.
pub fn patch_diagnostics(report: &SimulationReport, orbit: &PolarOrbit, a2: &[Complex64], tol: f64) -> Result<DiagnosticsReport> {
    let t_end = *report.times.last().unwrap_or(&0.0);
    let traj = integrate_orbit(&report.params, t_end.max(1e-12), tol)?;
    let y0 = report.params.y0;
    let positions = |t: f64| {
        let s = traj.state_at(t);
        let mid = Complex64::new(0.5 * s.x0, 0.5 * y0);
        let half = Complex64::new(0.5 * s.eta, 0.5 * s.xi);
        [mid + half, mid - half]
    };
    let max_centroid_error =
        report.times.iter().zip(&report.centroids).map(|(&t, c)| (c[0] - positions(t)[0]).norm()).fold(0.0, f64::max);
    let a2i = TrigInterpolant::new(a2);
    let eps = report.eps;
    let a0 = report.areas[0];
    let snapshots = report
        .snapshots
        .iter()
        .map(|s| {
            let c = [centroid(&s.gamma[0]), centroid(&s.gamma[1])];
            let pv = positions(s.t);
            let modes = radial_modes(&s.gamma[0], c[0], eps, 8).iter().map(|m| m.norm()).collect();
            let phi = (orbit.omega0 * s.t).rem_euclid(TAU);
            SnapshotDiagnostics {
                t: s.t,
                centroid: c,
                point_vortex: pv,
                centroid_error: (c[0] - pv[0]).norm(),
                area_drift: [area(&s.gamma[0]) / a0[0] - 1.0, area(&s.gamma[1]) / a0[1] - 1.0],
                modes,
                mode2_prediction: 0.5 * eps * eps * a2i.eval(phi).norm(),
            }
        })
        .collect();
    Ok(DiagnosticsReport { snapshots, max_centroid_error, max_area_drift: report.max_area_drift() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, r: f64, c: Complex64) -> Vec<Complex64> {
        (0..n).map(|k| c + Complex64::from_polar(r, node(k, n))).collect()
    }

    #[test]
    fn circle_geometry() {
        let z = circle(64, 0.3, Complex64::new(1.0, 2.0));
        assert!((area(&z) - PI * 0.09).abs() < 1e-14);
        assert!((centroid(&z) - Complex64::new(1.0, 2.0)).norm() < 1e-14);
        assert!(!self_intersects(&z));
    }

    #[test]
    fn rankine_rotation() {
        // a disc of vorticity ω rotates rigidly at ω/2 inside and on its boundary
        let z = circle(64, 0.5, Complex64::new(0.0, 0.0));
        let dz = derivative_c(&z);
        for k in [0usize, 7, 33] {
            let u = conj_velocity(z[k], &z, &dz, 2.0).conj();
            let expected = Complex64::new(0.0, 1.0) * z[k];
            assert!((u - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn redistribution_keeps_shape() {
        let n = 64;
        let z: Vec<Complex64> =
            (0..n).map(|k| {
                let s = node(k, n) + 0.3 * node(k, n).sin();
                Complex64::from_polar(1.0 + 0.1 * (2.0 * s).cos(), s)
            }).collect();
        let r = redistribute(&z);
        assert!((area(&r) - area(&z)).abs() < 1e-10);
        let sp: Vec<f64> = (0..n).map(|i| (r[(i + 1) % n] - r[i]).norm()).collect();
        let (lo, hi) = sp.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi / lo < 1.01);
    }
}
