use super::geometry::PatchGeometry;
use crate::error::{Error, Result};
use crate::numerics::spectral::{node, periodic_derivative};
use crate::numerics::{gauss_legendre, Axis, GridField};
use crate::par;
use num_complex::Complex64;

/// Tensor rule for the area integrals: Gauss-Legendre in the radius, trapezoid in the angle
/// (the angle nodes are the θ grid).
#[derive(Debug, Clone)]
pub struct PsiQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PsiQuadrature {
    pub fn new(n_radial: usize) -> Self {
        let (x, w) = gauss_legendre(n_radial);
        // map to [0, 1]
        PsiQuadrature { nodes: x.iter().map(|t| 0.5 * (t + 1.0)).collect(), weights: w.iter().map(|v| 0.5 * v).collect() }
    }
}

impl Default for PsiQuadrature {
    fn default() -> Self {
        Self::new(64)
    }
}

/// `log|1+u| − Re u`, written to avoid cancellation for small `u`.
#[inline]
fn log_remainder(u: Complex64) -> f64 {
    0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p() - u.re
}

/// Weights `W_m` with `(1/2π)∫ log|2 sin((θ_k − η)/2)| f(η) dη ≈ Σ_m W_{k−m} f(η_m)`,
/// exact for trigonometric polynomials resolved by the grid.
fn log_sine_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|m| {
            let x = node(m, n);
            let mut s = 0.0;
            for j in 1..n / 2 {
                s -= (j as f64 * x).cos() / j as f64;
            }
            s -= (0.5 * n as f64 * x).cos() / n as f64;
            s / n as f64
        })
        .collect()
}

fn check_radius(eps: f64, r: &GridField, geom: &PatchGeometry) -> Result<Vec<f64>> {
    if r.n_phi != geom.n_phi() {
        return Err(Error::InvalidParameter(format!("field has n_phi = {} but the orbit has {}", r.n_phi, geom.n_phi())));
    }
    if r.n_theta < 4 || !r.n_theta.is_multiple_of(2) {
        return Err(Error::InvalidParameter("n_theta must be even and at least 4".into()));
    }
    r.data
        .iter()
        .map(|&v| {
            let s = 1.0 + 2.0 * eps * v;
            if s > 0.0 {
                Ok(s.sqrt())
            } else {
                Err(Error::InvalidParameter(format!("radius positivity fails: 1 + 2 eps r = {s}")))
            }
        })
        .collect()
}

struct RowContext<'a> {
    eps: f64,
    nt: usize,
    geom: &'a PatchGeometry,
    radius: &'a [f64],
    quad: &'a PsiQuadrature,
    log_w: &'a [f64],
}

impl RowContext<'_> {
    fn row(&self, i: usize) -> &[f64] {
        &self.radius[i * self.nt..(i + 1) * self.nt]
    }

    /// Self-interaction term via the boundary form
    /// `⟨((2 log|w − z| − 1)/4) (w − z)·n⟩`, with the log singularity split off.
    fn psi1(&self, i: usize) -> Vec<f64> {
        let nt = self.nt;
        let rr = self.row(i);
        let dr = periodic_derivative(rr);
        let th: Vec<f64> = (0..nt).map(|j| node(j, nt)).collect();
        let w: Vec<Complex64> = (0..nt).map(|j| Complex64::from_polar(rr[j], th[j])).collect();
        let wp: Vec<Complex64> = (0..nt).map(|j| Complex64::new(dr[j], rr[j]) * Complex64::from_polar(1.0, th[j])).collect();
        // outward normal times arclength element: −i w'
        let nrm: Vec<Complex64> = wp.iter().map(|v| Complex64::new(v.im, -v.re)).collect();
        (0..nt)
            .map(|k| {
                let z = w[k];
                let mut s_log = 0.0;
                let mut s_smooth = 0.0;
                for m in 0..nt {
                    let d = w[m] - z;
                    let dn = d.re * nrm[m].re + d.im * nrm[m].im;
                    let ell = if m == k {
                        wp[k].norm().ln()
                    } else {
                        let sine = (2.0 * (0.5 * (th[m] - th[k])).sin()).abs();
                        (d.norm() / sine).ln()
                    };
                    s_log += self.log_w[(k + nt - m) % nt] * 0.5 * dn;
                    s_smooth += (2.0 * ell - 1.0) * 0.25 * dn;
                }
                s_log + s_smooth / nt as f64
            })
            .collect()
    }

    /// `sign · ⟨∫₀^{R_src(η)} (log|1+u| − Re u) l dl⟩` with `u = ε(a z + b l e^{±iη})/den`.
    fn far_term(&self, i: usize, src: &[f64], rot: Complex64, conj_src: bool, src_sign: f64, den: Complex64) -> Vec<f64> {
        let nt = self.nt;
        let rr = self.row(i);
        let scale = self.eps / den;
        // source points l e^{±iη} times the rotation, pre-scaled
        let nq = self.quad.nodes.len();
        let mut pts = Vec::with_capacity(nt * nq);
        let mut wts = Vec::with_capacity(nt * nq);
        for m in 0..nt {
            let eta = node(m, nt);
            let dir = if conj_src { Complex64::from_polar(1.0, -eta) * rot.conj() } else { Complex64::from_polar(1.0, eta) };
            let rmax = src[m];
            for (x, wq) in self.quad.nodes.iter().zip(&self.quad.weights) {
                let l = rmax * x;
                pts.push(dir * (src_sign * l) * scale);
                wts.push(wq * rmax * l);
            }
        }
        (0..nt)
            .map(|k| {
                let z = Complex64::from_polar(rr[k], node(k, nt)) * rot * scale;
                let mut s = 0.0;
                for (p, wq) in pts.iter().zip(&wts) {
                    s += wq * log_remainder(z + p);
                }
                s / nt as f64
            })
            .collect()
    }

    fn psi_n(&self, n: usize, i: usize) -> Vec<f64> {
        let g = self.geom;
        let ip = g.orbit.shifted(i);
        let th = g.orbit.theta_big[i];
        let rot = Complex64::from_polar(1.0, th);
        let one = Complex64::new(1.0, 0.0);
        match n {
            1 => self.psi1(i),
            2 => self.far_term(i, self.row(ip), one, false, 1.0, Complex64::new(g.orbit.q[i].sqrt(), 0.0)),
            3 => self.far_term(i, self.row(i), rot, true, -1.0, g.w3[i]).into_iter().map(|v| -v).collect(),
            4 => self.far_term(i, self.row(ip), rot, true, 1.0, g.w4[i]).into_iter().map(|v| -v).collect(),
            _ => unreachable!(),
        }
    }
}

fn eval_rows(eps: f64, r: &GridField, geom: &PatchGeometry, quad: &PsiQuadrature, which: &[usize]) -> Result<GridField> {
    let radius = check_radius(eps, r, geom)?;
    let nt = r.n_theta;
    let log_w = log_sine_weights(nt);
    let ctx = RowContext { eps, nt, geom, radius: &radius, quad, log_w: &log_w };
    let rows = par::map_range(r.n_phi, |i| {
        let mut acc = vec![0.0; nt];
        for &n in which {
            if n != 1 && eps == 0.0 {
                continue;
            }
            for (a, v) in acc.iter_mut().zip(ctx.psi_n(n, i)) {
                *a += v;
            }
        }
        acc
    });
    Ok(GridField::from_rows(rows))
}

/// Samples `Ψ_n(ε, r)` on the grid of `r` (n = 1..4). Averages in η are normalized by 2π.
pub fn psi_eval(n: usize, eps: f64, r: &GridField, geom: &PatchGeometry, quad: &PsiQuadrature) -> Result<GridField> {
    if !(1..=4).contains(&n) {
        return Err(Error::InvalidParameter(format!("psi index must be 1..4, got {n}")));
    }
    eval_rows(eps, r, geom, quad, &[n])
}

/// `Σ_n Ψ_n(ε, r)`.
pub fn psi_sum(eps: f64, r: &GridField, geom: &PatchGeometry, quad: &PsiQuadrature) -> Result<GridField> {
    eval_rows(eps, r, geom, quad, &[1, 2, 3, 4])
}

/// `G(r) = ε³ω₀∂φr − ε³ω₀Θ̇∂θr + ∂θ Σ_n Ψ_n(ε, r)`.
pub fn g_residual(eps: f64, r: &GridField, geom: &PatchGeometry, quad: &PsiQuadrature) -> Result<GridField> {
    let psi = psi_sum(eps, r, geom, quad)?;
    let w0 = geom.orbit.omega0;
    let rs = r.to_spectral();
    let e3 = eps * eps * eps;
    let transport = rs
        .derivative(Axis::Phi)
        .to_grid()
        .scale(e3 * w0)
        .sub(&rs.derivative(Axis::Theta).to_grid().scale_rows(&geom.orbit.theta_dot).scale(e3 * w0));
    let dpsi = psi.to_spectral().derivative(Axis::Theta).to_grid();
    Ok(transport.add(&dpsi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_weights_reproduce_fourier_symbol() {
        // (1/2π)∫ log|2 sin((θ−η)/2)| cos(jη) dη = −cos(jθ)/(2j)
        let n = 32;
        let w = log_sine_weights(n);
        for j in 1..10 {
            for k in [0usize, 3, 11] {
                let s: f64 = (0..n).map(|m| w[(k + n - m) % n] * (j as f64 * node(m, n)).cos()).sum();
                let exact = -(j as f64 * node(k, n)).cos() / (2.0 * j as f64);
                assert!((s - exact).abs() < 1e-14, "j={j} k={k}");
            }
        }
    }

    #[test]
    fn remainder_small_argument() {
        let u = Complex64::new(1e-9, 2e-9);
        let exact = 0.5 * (u.im * u.im - u.re * u.re);
        assert!((log_remainder(u) - exact).abs() < 1e-24);
    }
}
