//! Fourier calculus on the torus 𝕋² = (φ, θ).
//!
//! Grid values live in [`GridField`] (row-major, φ is the slow index) and Fourier
//! coefficients in [`BoundaryField`]. Coefficients are normalized so that a pure mode
//! `e^{i(ℓφ + jθ)}` has coefficient 1.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place forward DFT scaled by 1/n (coefficients of the trigonometric interpolant).
pub fn fft_forward(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, false).process(buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
}

/// In-place inverse of [`fft_forward`].
pub fn fft_inverse(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// Signed frequency of FFT index `k` for length `n`. The Nyquist index maps to `n/2`.
pub fn freq(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn is_nyquist(k: usize, n: usize) -> bool {
    n.is_multiple_of(2) && k == n / 2
}

/// Spectral derivative of a periodic sequence sampled on [0, 2π).
pub fn periodic_derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        *c = if is_nyquist(k, n) { Complex64::new(0.0, 0.0) } else { *c * Complex64::new(0.0, freq(k, n) as f64) };
    }
    fft_inverse(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Trigonometric interpolation of periodic samples on [0, 2π).
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(values: &[Complex64]) -> Self {
        let mut coeffs = values.to_vec();
        fft_forward(&mut coeffs);
        let n = coeffs.len();
        if n.is_multiple_of(2) {
            // split the Nyquist mode symmetrically so real data stays real
            coeffs[n / 2] *= 0.5;
        }
        TrigInterpolant { coeffs }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.coeffs.len();
        let mut s = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            let f = freq(k, n) as f64;
            s += c * Complex64::from_polar(1.0, f * x);
            if is_nyquist(k, n) {
                s += c * Complex64::from_polar(1.0, -f * x);
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Phi,
    Theta,
}

/// Real samples on the uniform `n_phi × n_theta` grid of 𝕋².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub n_phi: usize,
    pub n_theta: usize,
    pub data: Vec<f64>,
}

impl GridField {
    pub fn zeros(n_phi: usize, n_theta: usize) -> Self {
        GridField { n_phi, n_theta, data: vec![0.0; n_phi * n_theta] }
    }

    pub fn from_fn(n_phi: usize, n_theta: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut g = Self::zeros(n_phi, n_theta);
        for i in 0..n_phi {
            for j in 0..n_theta {
                g.data[i * n_theta + j] = f(node(i, n_phi), node(j, n_theta));
            }
        }
        g
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n_phi = rows.len();
        let n_theta = rows.first().map_or(0, |r| r.len());
        GridField { n_phi, n_theta, data: rows.into_iter().flatten().collect() }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_theta + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_theta..(i + 1) * self.n_theta]
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Root mean square over the grid.
    pub fn rms(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64).sqrt()
    }

    pub fn zip_map(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> GridField {
        assert_eq!((self.n_phi, self.n_theta), (other.n_phi, other.n_theta), "grid mismatch");
        GridField {
            n_phi: self.n_phi,
            n_theta: self.n_theta,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField { n_phi: self.n_phi, n_theta: self.n_theta, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn add(&self, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> GridField {
        self.map(|v| v * s)
    }

    /// Multiplies row `i` by `w[i]`.
    pub fn scale_rows(&self, w: &[f64]) -> GridField {
        assert_eq!(w.len(), self.n_phi);
        let mut out = self.clone();
        for i in 0..self.n_phi {
            out.data[i * self.n_theta..(i + 1) * self.n_theta].iter_mut().for_each(|v| *v *= w[i]);
        }
        out
    }

    /// Mean over θ for each φ row.
    pub fn spatial_means(&self) -> Vec<f64> {
        (0..self.n_phi).map(|i| self.row(i).iter().sum::<f64>() / self.n_theta as f64).collect()
    }

    pub fn to_spectral(&self) -> BoundaryField {
        BoundaryField::from_grid(self)
    }
}

/// Uniform node `k` of `n` on [0, 2π).
#[inline]
pub fn node(k: usize, n: usize) -> f64 {
    std::f64::consts::TAU * k as f64 / n as f64
}

/// Fourier coefficients of a field on 𝕋², indexed by FFT order in (ℓ, j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryField {
    pub n_phi: usize,
    pub n_theta: usize,
    /// Row-major: `coeffs[lk * n_theta + jk]` with `lk`, `jk` FFT indices.
    pub coeffs: Vec<Complex64>,
    /// The field is the transform of real data (conjugate symmetric coefficients).
    pub real: bool,
}

impl BoundaryField {
    pub fn zeros(n_phi: usize, n_theta: usize) -> Self {
        BoundaryField { n_phi, n_theta, coeffs: vec![Complex64::new(0.0, 0.0); n_phi * n_theta], real: true }
    }

    pub fn from_grid(g: &GridField) -> Self {
        let (np, nt) = (g.n_phi, g.n_theta);
        let mut c: Vec<Complex64> = g.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform_2d(&mut c, np, nt, false);
        BoundaryField { n_phi: np, n_theta: nt, coeffs: c, real: true }
    }

    /// Real part of the synthesized grid values.
    pub fn to_grid(&self) -> GridField {
        let c = self.to_complex_grid();
        GridField { n_phi: self.n_phi, n_theta: self.n_theta, data: c.iter().map(|z| z.re).collect() }
    }

    pub fn to_complex_grid(&self) -> Vec<Complex64> {
        let mut c = self.coeffs.clone();
        transform_2d(&mut c, self.n_phi, self.n_theta, true);
        c
    }

    /// Coefficient of `e^{i(ℓφ + jθ)}`; zero when outside the resolved band.
    pub fn mode(&self, l: i64, j: i64) -> Complex64 {
        match (index_of(l, self.n_phi), index_of(j, self.n_theta)) {
            (Some(a), Some(b)) => self.coeffs[a * self.n_theta + b],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set_mode(&mut self, l: i64, j: i64, v: Complex64) {
        let a = index_of(l, self.n_phi).expect("phi mode out of band");
        let b = index_of(j, self.n_theta).expect("theta mode out of band");
        self.coeffs[a * self.n_theta + b] = v;
    }

    fn map_modes(&self, f: impl Fn(i64, i64, bool, Complex64) -> Complex64) -> BoundaryField {
        let mut out = self.clone();
        for a in 0..self.n_phi {
            let l = freq(a, self.n_phi);
            for b in 0..self.n_theta {
                let j = freq(b, self.n_theta);
                let nyq = is_nyquist(a, self.n_phi) || is_nyquist(b, self.n_theta);
                let k = a * self.n_theta + b;
                out.coeffs[k] = f(l, j, nyq, self.coeffs[k]);
            }
        }
        out
    }

    /// ∂φ or ∂θ. Nyquist modes are dropped since their derivative is not real.
    pub fn derivative(&self, axis: Axis) -> BoundaryField {
        let (np, nt) = (self.n_phi, self.n_theta);
        let mut out = self.clone();
        for a in 0..np {
            for b in 0..nt {
                let k = a * nt + b;
                let (f, nyq) = match axis {
                    Axis::Phi => (freq(a, np), is_nyquist(a, np)),
                    Axis::Theta => (freq(b, nt), is_nyquist(b, nt)),
                };
                out.coeffs[k] = if nyq { Complex64::new(0.0, 0.0) } else { self.coeffs[k] * Complex64::new(0.0, f as f64) };
            }
        }
        out
    }

    /// Derivative after the 2/3-rule filter.
    pub fn derivative_dealiased(&self, axis: Axis) -> BoundaryField {
        self.dealias().derivative(axis)
    }

    /// Toroidal Hilbert transform in θ: mode j ↦ i·sign(j).
    pub fn hilbert(&self) -> BoundaryField {
        let nt = self.n_theta;
        self.map_modes(|_, j, _, c| {
            if j == 0 || (nt.is_multiple_of(2) && j == nt as i64 / 2) {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, j.signum() as f64)
            }
        })
    }

    /// Solves `(∂θ − ℋ) u = f` on the modes |j| ≥ 2, where the symbol is `i(j − sign j)`.
    ///
    /// Errors if any coefficient with |j| ≤ 1 exceeds `tol` in modulus. The returned
    /// field has zero spatial mean and no ±1 modes.
    pub fn invert_theta_elliptic(&self, tol: f64) -> Result<BoundaryField> {
        for a in 0..self.n_phi {
            for jj in -1i64..=1 {
                if let Some(b) = index_of(jj, self.n_theta) {
                    let m = self.coeffs[a * self.n_theta + b].norm();
                    if m > tol {
                        return Err(Error::DegenerateMode { l: freq(a, self.n_phi), j: jj, magnitude: m, tol });
                    }
                }
            }
        }
        let nt = self.n_theta;
        Ok(self.map_modes(|_, j, _, c| {
            if j.abs() <= 1 || (nt.is_multiple_of(2) && j == nt as i64 / 2) {
                Complex64::new(0.0, 0.0)
            } else {
                c / Complex64::new(0.0, (j - j.signum()) as f64)
            }
        }))
    }

    /// Applies `(∂θ − ℋ)`.
    pub fn theta_elliptic(&self) -> BoundaryField {
        let nt = self.n_theta;
        self.map_modes(|_, j, _, c| {
            if nt.is_multiple_of(2) && j == nt as i64 / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, (j - j.signum()) as f64)
            }
        })
    }

    /// 2/3-rule filter: zero every mode with |ℓ| > n_phi/3 or |j| > n_theta/3.
    pub fn dealias(&self) -> BoundaryField {
        let lc = (self.n_phi / 3) as i64;
        let jc = (self.n_theta / 3) as i64;
        self.map_modes(|l, j, _, c| if l.abs() > lc || j.abs() > jc { Complex64::new(0.0, 0.0) } else { c })
    }

    /// Pointwise product of two fields, each filtered by the 2/3 rule first.
    pub fn product(&self, other: &BoundaryField) -> BoundaryField {
        let a = self.dealias().to_grid();
        let b = other.dealias().to_grid();
        a.zip_map(&b, |x, y| x * y).to_spectral()
    }

    pub fn remove_spatial_mean(&self) -> BoundaryField {
        self.map_modes(|_, j, _, c| if j == 0 { Complex64::new(0.0, 0.0) } else { c })
    }

    /// Largest |coefficient(ℓ, 0)| over ℓ.
    pub fn spatial_mean_size(&self) -> f64 {
        (0..self.n_phi).map(|a| self.coeffs[a * self.n_theta].norm()).fold(0.0, f64::max)
    }

    pub fn has_zero_spatial_mean(&self, tol: f64) -> bool {
        self.spatial_mean_size() <= tol
    }

    /// Largest |coefficient(ℓ, ±1)| over ℓ.
    pub fn mode_one_size(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..self.n_phi {
            for j in [-1i64, 1] {
                if let Some(b) = index_of(j, self.n_theta) {
                    m = m.max(self.coeffs[a * self.n_theta + b].norm());
                }
            }
        }
        m
    }

    /// ℓ² norm of the coefficients (equals the grid RMS by Parseval).
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation from conjugate symmetry.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let (np, nt) = (self.n_phi, self.n_theta);
        let mut d: f64 = 0.0;
        for a in 0..np {
            for b in 0..nt {
                let c = self.coeffs[a * nt + b];
                let cm = self.coeffs[((np - a) % np) * nt + (nt - b) % nt];
                d = d.max((c - cm.conj()).norm());
            }
        }
        d
    }

    pub fn add(&self, other: &BoundaryField) -> BoundaryField {
        assert_eq!((self.n_phi, self.n_theta), (other.n_phi, other.n_theta), "grid mismatch");
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b);
        out.real = self.real && other.real;
        out
    }

    pub fn sub(&self, other: &BoundaryField) -> BoundaryField {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> BoundaryField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|a| *a *= s);
        out
    }

    /// Multiplies the grid values of φ slice `i` by `w[i]`.
    pub fn scale_phi_slices(&self, w: &[f64]) -> BoundaryField {
        self.to_grid().scale_rows(w).to_spectral()
    }
}

fn index_of(f: i64, n: usize) -> Option<usize> {
    let n_i = n as i64;
    let lo = -((n_i - 1) / 2);
    let hi = n_i / 2;
    if f < lo || f > hi {
        return None;
    }
    if f >= 0 {
        Some(f as usize)
    } else {
        Some((n_i + f) as usize)
    }
}

fn transform_2d(c: &mut [Complex64], np: usize, nt: usize, inverse: bool) {
    let run = |buf: &mut [Complex64]| if inverse { fft_inverse(buf) } else { fft_forward(buf) };
    for row in c.chunks_mut(nt) {
        run(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); np];
    for b in 0..nt {
        for a in 0..np {
            col[a] = c[a * nt + b];
        }
        run(&mut col);
        for a in 0..np {
            c[a * nt + b] = col[a];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for n in [8usize, 9] {
            for k in 0..n {
                assert_eq!(index_of(freq(k, n), n), Some(k));
            }
        }
        assert_eq!(index_of(5, 8), None);
        assert_eq!(index_of(-4, 8), None);
        assert_eq!(index_of(-4, 9), Some(5));
        assert_eq!(index_of(-5, 9), None);
    }

    #[test]
    fn trig_interpolant_reproduces_modes() {
        let n = 16;
        let v: Vec<Complex64> = (0..n).map(|k| Complex64::new((3.0 * node(k, n)).cos(), 0.0)).collect();
        let ti = TrigInterpolant::new(&v);
        assert!((ti.eval(0.3) - Complex64::new((0.9f64).cos(), 0.0)).norm() < 1e-14);
    }
}
