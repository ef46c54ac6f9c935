use crate::error::{Error, Result};
use crate::numerics::spectral::node;
use crate::numerics::GridField;
use crate::pointvortex::PolarOrbit;
use num_complex::Complex64;

/// Pole positions and series coefficients along a polar orbit.
#[derive(Debug, Clone)]
pub struct PatchGeometry {
    pub orbit: PolarOrbit,
    /// `i(√q sinΘ + y₀)` on the φ grid.
    pub w3: Vec<Complex64>,
    /// `√q cosΘ + i y₀` on the φ grid.
    pub w4: Vec<Complex64>,
    pub k_max: usize,
    /// `a[k][i] = q^{−k/2} − e^{ikΘ}/w₃^k − e^{ikΘ}/w₄^k`; entries 0 and 1 are unused.
    pub a: Vec<Vec<Complex64>>,
}

impl PatchGeometry {
    pub fn new(orbit: PolarOrbit, k_max: usize) -> Result<Self> {
        if k_max < 2 {
            return Err(Error::InvalidParameter("k_max must be at least 2".into()));
        }
        let y0 = orbit.y0;
        let n = orbit.n_phi;
        let mut w3 = Vec::with_capacity(n);
        let mut w4 = Vec::with_capacity(n);
        for i in 0..n {
            let sq = orbit.q[i].sqrt();
            let (s, c) = orbit.theta_big[i].sin_cos();
            w3.push(Complex64::new(0.0, sq * s + y0));
            w4.push(Complex64::new(sq * c, y0));
        }
        let mut a = vec![vec![Complex64::new(0.0, 0.0); n]; k_max + 1];
        for (k, ak) in a.iter_mut().enumerate().skip(2) {
            for i in 0..n {
                let e = Complex64::from_polar(1.0, k as f64 * orbit.theta_big[i]);
                ak[i] = Complex64::new(orbit.q[i].powf(-0.5 * k as f64), 0.0) - e / w3[i].powu(k as u32) - e / w4[i].powu(k as u32);
            }
        }
        Ok(PatchGeometry { orbit, w3, w4, k_max, a })
    }

    pub fn n_phi(&self) -> usize {
        self.orbit.n_phi
    }

    /// Smallest of `√q, |w₃|, |w₄|` over the grid: the radius of convergence of the series in ε.
    pub fn pole_distance(&self) -> f64 {
        (0..self.n_phi())
            .map(|i| self.orbit.q[i].sqrt().min(self.w3[i].norm()).min(self.w4[i].norm()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks `|w₃| ≥ y₀ − ξ₀` and `|w₄| ≥ y₀` (up to `tol`).
    pub fn pole_bounds_hold(&self, tol: f64) -> bool {
        let y0 = self.orbit.y0;
        let xi0 = self.orbit.xi0;
        self.w3.iter().all(|w| w.norm() >= y0 - xi0 - tol) && self.w4.iter().all(|w| w.norm() >= y0 - tol)
    }

    fn a_k_at(&self, k: usize, i: usize) -> Complex64 {
        if k <= self.k_max {
            self.a[k][i]
        } else {
            let o = &self.orbit;
            let e = Complex64::from_polar(1.0, k as f64 * o.theta_big[i]);
            Complex64::new(o.q[i].powf(-0.5 * k as f64), 0.0) - e / self.w3[i].powu(k as u32) - e / self.w4[i].powu(k as u32)
        }
    }

    /// Field `Re{c_k(φ) e^{ikθ}}` (or `Im` when `imag`) for `c_k = a_k`.
    pub(crate) fn mode_field(&self, k: usize, n_theta: usize, imag: bool) -> GridField {
        let n = self.n_phi();
        let mut g = GridField::zeros(n, n_theta);
        for i in 0..n {
            let c = self.a_k_at(k, i);
            for j in 0..n_theta {
                let v = c * Complex64::from_polar(1.0, k as f64 * node(j, n_theta));
                g.data[i * n_theta + j] = if imag { v.im } else { v.re };
            }
        }
        g
    }
}

/// `𝚐(φ, θ) = Re{a₂(φ) e^{2iθ}}`.
pub fn g_field(geom: &PatchGeometry, n_theta: usize) -> GridField {
    geom.mode_field(2, n_theta, false)
}

/// A truncated series together with a bound on the neglected tail.
#[derive(Debug, Clone)]
pub struct SeriesField {
    pub field: GridField,
    pub tail_bound: f64,
}

/// Series for the functional at the unperturbed disc:
/// `Σ_{k=2}^{k_max} ((−ε)^k / 2) Im{a_k e^{ikθ}}`.
pub fn g0_series(eps: f64, geom: &PatchGeometry, n_theta: usize, k_max: usize) -> Result<SeriesField> {
    let rho = geom.pole_distance();
    if eps >= rho / 3.0 {
        return Err(Error::InvalidParameter(format!("eps = {eps} violates the series margin eps < {:.6}", rho / 3.0)));
    }
    let n = geom.n_phi();
    let mut field = GridField::zeros(n, n_theta);
    for k in 2..=k_max {
        let c = 0.5 * (-eps).powi(k as i32);
        let m = geom.mode_field(k, n_theta, true);
        field.data.iter_mut().zip(&m.data).for_each(|(f, v)| *f += c * v);
    }
    let ratio = eps / rho;
    let tail_bound = 1.5 * ratio.powi(k_max as i32 + 1) / (1.0 - ratio);
    Ok(SeriesField { field, tail_bound })
}
