use crate::error::{Error, Result};
use crate::numerics::ode::{self, OdeOptions};
use crate::numerics::spectral::TrigInterpolant;
use crate::par;
use crate::pointvortex::{frequency, q_theta_rhs, PolarOrbit, VortexParams};
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

pub type CMatrix4 = Matrix4<Complex64>;
pub type CVector4 = Vector4<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coefficients of the coupled ±1-mode system along the orbit of `ξ₀`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModeOneSystem {
    pub params: VortexParams,
    pub omega0: f64,
    /// Constant correction in the first coefficient (zero by default).
    pub c2: f64,
    /// Integration tolerance for the coupled orbit/matrix ODE.
    pub tol: f64,
}

impl ModeOneSystem {
    pub fn new(params: &VortexParams) -> Result<Self> {
        Ok(ModeOneSystem { params: *params, omega0: frequency(params)?, c2: 0.0, tol: 1e-12 })
    }

    pub fn with_c2(mut self, c2: f64) -> Self {
        self.c2 = c2;
        self
    }

    /// `(ρ₁, ρ₂, ρ₃, ρ₄)` at angle φ for orbit values `(q, Θ)`.
    ///
    /// The reference phase is `φ' = φ + π/2`, so `Θ̂ = Θ − φ'` starts at zero.
    pub fn rho(&self, phi: f64, q: f64, th: f64) -> [Complex64; 4] {
        let y0 = self.params.y0;
        let w0 = self.omega0;
        let eps = self.params.eps;
        let sq = q.sqrt();
        let w3 = Complex64::new(0.0, sq * th.sin() + y0);
        let w4 = Complex64::new(sq * th.cos(), y0);
        let phr = phi + FRAC_PI_2;
        let thh = th - phr;
        let e_ph = Complex64::from_polar(1.0, 2.0 * phr);
        let r1 = I / w0 * (w0 + 1.0 / (2.0 * w3 * w3) - eps * self.c2);
        let r2 = -I / (4.0 * w0) * (Complex64::from_polar(1.0 / q, -2.0 * thh) - e_ph / (w3 * w3) - e_ph / (w4 * w4));
        let r3 = -I / (2.0 * w0 * w4 * w4);
        let r4 = I * Complex64::from_polar(1.0, 2.0 * thh) / (2.0 * w0 * q);
        [r1, r2, r3, r4]
    }

    /// `A(φ)`; rows 3 and 4 use the coefficients half a period later.
    pub fn matrix(&self, phi: f64, q: f64, th: f64) -> CMatrix4 {
        let [r1, r2, r3, r4] = self.rho(phi, q, th);
        let [s1, s2, s3, s4] = self.rho(phi + PI, q, th + PI);
        #[rustfmt::skip]
        let m = CMatrix4::new(
            r1, r2, r3, r4,
            r2.conj(), r1.conj(), r4.conj(), r3.conj(),
            s3, s4, s1, s2,
            s4.conj(), s3.conj(), s2.conj(), s1.conj(),
        );
        m
    }

    /// ρ arrays on the grid of a polar orbit.
    pub fn rho_grid(&self, orbit: &PolarOrbit) -> [Vec<Complex64>; 4] {
        let mut out: [Vec<Complex64>; 4] = Default::default();
        for k in 0..orbit.n_phi {
            let r = self.rho(orbit.phi(k), orbit.q[k], orbit.theta_big[k]);
            for n in 0..4 {
                out[n].push(r[n]);
            }
        }
        out
    }
}

/// `A₀`, the limit of `A(φ)` as ξ₀ → 0.
pub fn a0_matrix() -> CMatrix4 {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    #[rustfmt::skip]
    let m = CMatrix4::new(
        c(0.0, 1.0), c(0.0, -0.25), c(0.0, 0.0), c(0.0, 0.5),
        c(0.0, 0.25), c(0.0, -1.0), c(0.0, -0.5), c(0.0, 0.0),
        c(0.0, 0.0), c(0.0, 0.5), c(0.0, 1.0), c(0.0, -0.25),
        c(0.0, -0.5), c(0.0, 0.0), c(0.0, 0.25), c(0.0, -1.0),
    );
    m
}

/// `e^{φA₀}` from its explicit trigonometric entries.
pub fn exp_a0(phi: f64) -> CMatrix4 {
    let (s15, s7) = (15f64.sqrt(), 7f64.sqrt());
    let (a, b) = (s15 / 4.0 * phi, s7 / 4.0 * phi);
    let a1 = Complex64::new(0.5 * a.cos() + 0.5 * b.cos(), 2.0 / s15 * a.sin() + 2.0 / s7 * b.sin());
    let a2 = Complex64::new(0.0, 0.5 * (a.sin() / s15 - 3.0 * b.sin() / s7));
    let a3 = Complex64::new(0.5 * a.cos() - 0.5 * b.cos(), 2.0 / s15 * a.sin() - 2.0 / s7 * b.sin());
    let a4 = Complex64::new(0.0, 0.5 * (a.sin() / s15 + 3.0 * b.sin() / s7));
    #[rustfmt::skip]
    let m = CMatrix4::new(
        a1, a2, a3, a4,
        a2.conj(), a1.conj(), a4.conj(), a3.conj(),
        a3, a4, a1, a2,
        a4.conj(), a3.conj(), a2.conj(), a1.conj(),
    );
    m
}

/// `16 sin²(√15φ/8) sin²(√7φ/8)`.
pub fn det_identity(phi: f64) -> f64 {
    let a = (15f64.sqrt() * phi / 8.0).sin();
    let b = (7f64.sqrt() * phi / 8.0).sin();
    16.0 * a * a * b * b
}

/// `e^{φA₀}` and the determinant identity value at φ.
pub fn a0_reference(phi: f64) -> (CMatrix4, f64) {
    (exp_a0(phi), det_identity(phi))
}

/// `P conj(M) P` with `P` swapping components (1,2) and (3,4).
fn conj_swap(m: &CMatrix4) -> CMatrix4 {
    let p = [1usize, 0, 3, 2];
    CMatrix4::from_fn(|i, j| m[(p[i], p[j])].conj())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub xi0: f64,
    pub eps: f64,
    /// Row-major entries of `M(2π)`.
    pub m: Vec<Complex64>,
    pub det_gap: Complex64,
    /// `M = P conj(M) P` holds (the reality symmetry of the system).
    pub structure_ok: bool,
    pub structure_defect: f64,
    /// sup over φ ∈ [0, 2π] of the Frobenius norm of `M(φ)` at the step points.
    pub max_norm: f64,
}

impl MonodromyReport {
    pub fn matrix(&self) -> CMatrix4 {
        CMatrix4::from_row_slice(&self.m)
    }
}

fn pack(m: &CMatrix4) -> Vec<Complex64> {
    (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect()
}

/// State layout for the coupled integration: `[q, Θ, M (16, column-major), extra...]`.
fn coupled_rhs(sys: &ModeOneSystem, phi: f64, y: &[Complex64], dy: &mut [Complex64], extra_cols: usize, forcing: Option<&dyn Fn(f64) -> CVector4>) {
    let (q, th) = (y[0].re, y[1].re);
    let (dq, dth) = q_theta_rhs(q, th, sys.params.y0, sys.omega0);
    dy[0] = Complex64::new(dq, 0.0);
    dy[1] = Complex64::new(dth, 0.0);
    let a = sys.matrix(phi, q, th);
    let cols = 4 + extra_cols;
    for c in 0..cols {
        let base = 2 + 4 * c;
        let v = CVector4::new(y[base], y[base + 1], y[base + 2], y[base + 3]);
        let mut d = a * v;
        if c >= 4 {
            if let Some(f) = forcing {
                d += f(phi);
            }
        }
        dy[base..base + 4].copy_from_slice(d.as_slice());
    }
}

fn initial_state(sys: &ModeOneSystem, extra: &[CVector4]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(sys.params.xi0 * sys.params.xi0, 0.0), Complex64::new(FRAC_PI_2, 0.0)];
    let id = CMatrix4::identity();
    y.extend_from_slice(id.as_slice());
    for v in extra {
        y.extend_from_slice(v.as_slice());
    }
    y
}

/// Integrates `M' = A(φ)M`, `M(0) = Id` over one period together with the orbit.
pub fn fundamental_matrix(sys: &ModeOneSystem) -> Result<MonodromyReport> {
    let y0 = initial_state(sys, &[]);
    let s = *sys;
    let sol = ode::solve(
        move |phi, y: &[Complex64], dy: &mut [Complex64]| coupled_rhs(&s, phi, y, dy, 0, None),
        0.0,
        &y0,
        TAU,
        &OdeOptions::with_tol(sys.tol),
    )?;
    let yf = sol.final_state();
    let m = CMatrix4::from_column_slice(&yf[2..18]);
    let det_gap = (m - CMatrix4::identity()).determinant();
    let structure_defect = (m - conj_swap(&m)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_norm = sol
        .step_times()
        .iter()
        .map(|&t| {
            let y = sol.eval(t);
            CMatrix4::from_column_slice(&y[2..18]).norm()
        })
        .fold(0.0, f64::max);
    Ok(MonodromyReport {
        xi0: sys.params.xi0,
        eps: sys.params.eps,
        m: pack(&m),
        det_gap,
        structure_ok: structure_defect < 1e-8,
        structure_defect,
        max_norm,
    })
}

/// Integrates `Ṁ = A₀M` numerically (cross-check of [`exp_a0`]).
pub fn exp_a0_numeric(phi: f64, tol: f64) -> Result<CMatrix4> {
    let a0 = a0_matrix();
    let y0: Vec<Complex64> = CMatrix4::identity().as_slice().to_vec();
    let sol = ode::solve(
        move |_t, y: &[Complex64], dy: &mut [Complex64]| {
            let m = CMatrix4::from_column_slice(y);
            dy.copy_from_slice((a0 * m).as_slice());
        },
        0.0,
        &y0,
        phi,
        &OdeOptions::with_tol(tol),
    )?;
    Ok(CMatrix4::from_column_slice(sol.final_state()))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SingularRoot {
    pub xi0: f64,
    /// d/dξ₀ of Re det(M₀(2π) − Id) at the root.
    pub slope: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularScan {
    pub y0: f64,
    /// `(ξ₀, det(M₀(2π) − Id))` on the scan grid.
    pub samples: Vec<(f64, Complex64)>,
    pub roots: Vec<SingularRoot>,
}

impl SingularScan {
    /// Distance from ξ₀ to the nearest root, infinite if there are none.
    pub fn distance(&self, xi0: f64) -> f64 {
        self.roots.iter().map(|r| (r.xi0 - xi0).abs()).fold(f64::INFINITY, f64::min)
    }
}

fn det_gap_at(y0: f64, xi0: f64, tol: f64) -> Result<Complex64> {
    let mut sys = ModeOneSystem::new(&VortexParams::new(y0, xi0, 0.0)?)?;
    sys.tol = tol;
    Ok(fundamental_matrix(&sys)?.det_gap)
}

/// Zeros of `g(ξ₀) = det(M₀(2π) − Id)` (ε = 0) on `n` grid points in `[lo, hi]`.
pub fn singular_scan(y0: f64, lo: f64, hi: f64, n: usize, tol: f64) -> Result<SingularScan> {
    if n < 2 || !(lo < hi) {
        return Err(Error::InvalidParameter("singular scan needs n >= 2 and lo < hi".into()));
    }
    VortexParams::new(y0, lo, 0.0)?;
    VortexParams::new(y0, hi, 0.0)?;
    let xs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let vals: Vec<Result<Complex64>> = par::map_slice(&xs, |&x| det_gap_at(y0, x, tol));
    let vals: Vec<Complex64> = vals.into_iter().collect::<Result<_>>()?;
    let brackets: Vec<usize> = (1..n).filter(|&k| vals[k - 1].re.signum() != vals[k].re.signum()).collect();
    let roots: Vec<Result<SingularRoot>> = par::map_slice(&brackets, |&k| {
        let (mut a, mut b) = (xs[k - 1], xs[k]);
        let (mut fa, fb) = (vals[k - 1].re, vals[k].re);
        let width0 = b - a;
        let mut slope = (fb - fa) / width0;
        for _ in 0..60 {
            if (b - a) < 1e-12 * y0 {
                break;
            }
            let m = 0.5 * (a + b);
            let fm = det_gap_at(y0, m, tol)?.re;
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        let x = 0.5 * (a + b);
        let h = 1e-6 * y0;
        if let (Ok(p), Ok(m)) = (det_gap_at(y0, x + h, tol), det_gap_at(y0, x - h, tol)) {
            slope = (p.re - m.re) / (2.0 * h);
        }
        Ok(SingularRoot { xi0: x, slope })
    });
    let roots = roots.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SingularScan { y0, samples: xs.into_iter().zip(vals).collect(), roots })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeOneSolution {
    pub h0: [Complex64; 4],
    /// H on the forcing grid.
    pub h: Vec<[Complex64; 4]>,
    /// |H(2π) − H(0)|.
    pub periodicity_gap: f64,
    /// |(Id − M(2π))H(0) − ∫₀^{2π} M(2π,φ)F(φ)dφ|.
    pub residual: f64,
}

/// Periodic solution of `H' = A(φ)H + F(φ)` with `F` given on a uniform φ grid
/// (interpolated trigonometrically).
///
/// Refuses when ξ₀ is within `sigma` of a scanned singular root.
pub fn solve_mode_one(sys: &ModeOneSystem, forcing: &[[Complex64; 4]], scan: Option<&SingularScan>, sigma: f64) -> Result<ModeOneSolution> {
    if let Some(s) = scan {
        let d = s.distance(sys.params.xi0);
        if d < sigma {
            return Err(Error::NearSingular(format!("xi0 = {} is {d:.3e} from a singular root (sigma = {sigma:e})", sys.params.xi0)));
        }
    }
    let n = forcing.len();
    if n < 4 {
        return Err(Error::InvalidParameter("forcing needs at least 4 samples".into()));
    }
    let interp: Vec<TrigInterpolant> =
        (0..4).map(|c| TrigInterpolant::new(&forcing.iter().map(|v| v[c]).collect::<Vec<_>>())).collect();
    let f = move |phi: f64| CVector4::new(interp[0].eval(phi), interp[1].eval(phi), interp[2].eval(phi), interp[3].eval(phi));

    // pass 1: M(2π) and the particular solution from zero
    let y0 = initial_state(sys, &[CVector4::zeros()]);
    let s = *sys;
    let opts = OdeOptions::with_tol(sys.tol);
    let sol = ode::solve(|phi, y: &[Complex64], dy: &mut [Complex64]| coupled_rhs(&s, phi, y, dy, 1, Some(&f)), 0.0, &y0, TAU, &opts)?;
    let yf = sol.final_state();
    let m = CMatrix4::from_column_slice(&yf[2..18]);
    let p = CVector4::from_column_slice(&yf[18..22]);
    let lhs = CMatrix4::identity() - m;
    let h0 = lhs.lu().solve(&p).ok_or_else(|| Error::NearSingular("Id - M(2pi) is not invertible".into()))?;
    let residual = (lhs * h0 - p).norm();

    // pass 2: the periodic solution itself
    let y1 = initial_state(sys, &[h0]);
    let sol = ode::solve(|phi, y: &[Complex64], dy: &mut [Complex64]| coupled_rhs(&s, phi, y, dy, 1, Some(&f)), 0.0, &y1, TAU, &opts)?;
    let hf = CVector4::from_column_slice(&sol.final_state()[18..22]);
    let periodicity_gap = (hf - h0).norm();
    let h = (0..n)
        .map(|k| {
            let y = sol.eval(TAU * k as f64 / n as f64);
            [y[18], y[19], y[20], y[21]]
        })
        .collect();
    Ok(ModeOneSolution { h0: [h0[0], h0[1], h0[2], h0[3]], h, periodicity_gap, residual })
}
