//! Adaptive Dormand-Prince 5(4) integrator with continuous (dense) output.
//!
//! The state is a slice of any [`OdeScalar`], so the same engine drives real
//! systems (the vortex pair) and complex ones (fundamental matrices).
//! Integration backwards in time is supported by passing `t1 < t0`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

pub trait OdeScalar:
    Copy + Debug + Default + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn modulus(self) -> f64;
    fn finite(self) -> bool;
}

impl OdeScalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl OdeScalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    /// Largest allowed step magnitude.
    pub h_max: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol, ..Default::default() }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-12, h0: None, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }
}

// Tableau (Hairer, Nørsett & Wanner).
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
struct Segment<T> {
    t: f64,
    h: f64,
    r: [Vec<T>; 5],
}

#[derive(Debug, Clone)]
pub struct DenseSolution<T> {
    pub t0: f64,
    pub t1: f64,
    segments: Vec<Segment<T>>,
    y_end: Vec<T>,
    pub n_rhs: usize,
}

impl<T: OdeScalar> DenseSolution<T> {
    pub fn final_state(&self) -> &[T] {
        &self.y_end
    }

    pub fn n_steps(&self) -> usize {
        self.segments.len()
    }

    /// Times of the accepted step boundaries, starting at `t0`.
    pub fn step_times(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().map(|s| s.t).collect();
        v.push(self.t1);
        v
    }

    /// Continuous extension evaluated at `t` (clamped to the integration span).
    pub fn eval(&self, t: f64) -> Vec<T> {
        if self.segments.is_empty() {
            return self.y_end.clone();
        }
        let dir = (self.t1 - self.t0).signum();
        // index of the last segment whose start is not past t
        let idx = self
            .segments
            .partition_point(|s| (s.t - t) * dir <= 0.0)
            .saturating_sub(1);
        let seg = &self.segments[idx];
        let s = ((t - seg.t) / seg.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let n = seg.r[0].len();
        (0..n)
            .map(|i| seg.r[0][i] + (seg.r[1][i] + (seg.r[2][i] + (seg.r[3][i] + seg.r[4][i] * s1) * s) * s1) * s)
            .collect()
    }
}

fn axpy<T: OdeScalar>(out: &mut [T], y: &[T], h: f64, terms: &[(f64, &[T])]) {
    for i in 0..y.len() {
        let mut acc = T::default();
        for (c, k) in terms {
            if *c != 0.0 {
                acc = acc + k[i] * *c;
            }
        }
        out[i] = y[i] + acc * h;
    }
}

fn error_norm<T: OdeScalar>(y: &[T], y1: &[T], err: &[T], opts: &OdeOptions) -> f64 {
    let mut s = 0.0;
    for i in 0..y.len() {
        let sc = opts.atol + opts.rtol * y[i].modulus().max(y1[i].modulus());
        let e = err[i].modulus() / sc;
        s += e * e;
    }
    (s / y.len().max(1) as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`.
pub fn solve<T, F>(f: F, t0: f64, y0: &[T], t1: f64, opts: &OdeOptions) -> Result<DenseSolution<T>>
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
{
    integrate(f, t0, y0, t1, opts, None::<(fn(f64, &[T]) -> f64, f64)>).map(|(sol, _)| sol)
}

/// Integrates until the scalar `event(t, y)` changes sign (in either direction)
/// or `t_max` is reached. The crossing is refined by bisection on the dense output
/// to `event_tol` in time and the solution is truncated there.
pub fn solve_until_event<T, F, G>(
    f: F,
    t0: f64,
    y0: &[T],
    t_max: f64,
    opts: &OdeOptions,
    event: G,
    event_tol: f64,
) -> Result<(DenseSolution<T>, Option<f64>)>
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
    G: Fn(f64, &[T]) -> f64,
{
    integrate(f, t0, y0, t_max, opts, Some((event, event_tol)))
}

#[allow(clippy::type_complexity)]
fn integrate<T, F, G>(
    mut f: F,
    t0: f64,
    y0: &[T],
    t1: f64,
    opts: &OdeOptions,
    event: Option<(G, f64)>,
) -> Result<(DenseSolution<T>, Option<f64>)>
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
    G: Fn(f64, &[T]) -> f64,
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidParameter("ODE tolerances must be positive".into()));
    }
    let n = y0.len();
    let span = t1 - t0;
    let dir = if span >= 0.0 { 1.0 } else { -1.0 };
    let mut sol = DenseSolution { t0, t1, segments: Vec::new(), y_end: y0.to_vec(), n_rhs: 0 };
    if span == 0.0 {
        return Ok((sol, None));
    }

    let zero = vec![T::default(); n];
    let mut k: Vec<Vec<T>> = vec![zero.clone(); 7];
    let mut y = y0.to_vec();
    let mut ytmp = zero.clone();
    let mut y1 = zero.clone();
    let mut err = zero.clone();
    let mut t = t0;
    f(t, &y, &mut k[0]);
    sol.n_rhs += 1;

    let mut h = match opts.h0 {
        Some(h) => h.abs(),
        None => initial_step(&mut f, t, &y, &k[0], dir, opts, &mut sol.n_rhs),
    }
    .min(span.abs())
    .min(opts.h_max);
    let mut ev_prev = event.as_ref().map(|(g, _)| g(t, &y));
    let mut fac_old: f64 = 1e-4;
    let mut reject = false;

    for _ in 0..opts.max_steps {
        if (t - t1) * dir >= 0.0 {
            sol.y_end = y;
            sol.t1 = t;
            return Ok((sol, None));
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::StepUnderflow { t });
        }
        let mut last = false;
        if (t + dir * h - t1) * dir >= 0.0 {
            h = (t1 - t).abs();
            last = true;
        }
        let hs = dir * h;

        let (k1, rest) = k.split_first_mut().unwrap();
        let (k2, rest) = rest.split_first_mut().unwrap();
        let (k3, rest) = rest.split_first_mut().unwrap();
        let (k4, rest) = rest.split_first_mut().unwrap();
        let (k5, rest) = rest.split_first_mut().unwrap();
        let (k6, rest) = rest.split_first_mut().unwrap();
        let k7 = &mut rest[0];

        axpy(&mut ytmp, &y, hs, &[(A21, k1)]);
        f(t + C2 * hs, &ytmp, k2);
        axpy(&mut ytmp, &y, hs, &[(A31, k1), (A32, k2)]);
        f(t + C3 * hs, &ytmp, k3);
        axpy(&mut ytmp, &y, hs, &[(A41, k1), (A42, k2), (A43, k3)]);
        f(t + C4 * hs, &ytmp, k4);
        axpy(&mut ytmp, &y, hs, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        f(t + C5 * hs, &ytmp, k5);
        axpy(&mut ytmp, &y, hs, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
        f(t + hs, &ytmp, k6);
        axpy(&mut y1, &y, hs, &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
        f(t + hs, &y1, k7);
        sol.n_rhs += 6;

        for i in 0..n {
            err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
        }
        if y1.iter().any(|v| !v.finite()) {
            if h <= h_min * 2.0 {
                return Err(Error::NonFinite { t });
            }
            h *= 0.25;
            reject = true;
            continue;
        }
        let e = error_norm(&y, &y1, &err, opts);

        // PI step-size control
        let fac11 = e.powf(0.17);
        let mut fac = fac11 / fac_old.powf(0.04) / 0.9;
        fac = fac.clamp(0.1, 5.0);
        let h_new = h / fac;

        if e <= 1.0 {
            fac_old = e.max(1e-4);
            let mut r4 = zero.clone();
            let mut r2 = zero.clone();
            let mut r3 = zero.clone();
            let mut r5 = zero.clone();
            for i in 0..n {
                let dy = y1[i] - y[i];
                let bspl = k1[i] * hs - dy;
                r2[i] = dy;
                r3[i] = bspl;
                r4[i] = dy - k7[i] * hs - bspl;
                r5[i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * hs;
            }
            sol.segments.push(Segment { t, h: hs, r: [y.clone(), r2, r3, r4, r5] });
            let t_new = if last { t1 } else { t + hs };

            if let (Some((g, etol)), Some(prev)) = (event.as_ref(), ev_prev) {
                let cur = g(t_new, &y1);
                if prev != 0.0 && (cur == 0.0 || cur.signum() != prev.signum()) {
                    let te = bisect_event(&sol, g, t, t_new, prev, *etol);
                    let ye = sol.eval(te);
                    sol.t1 = te;
                    sol.y_end = ye;
                    return Ok((sol, Some(te)));
                }
                ev_prev = Some(cur);
            }

            std::mem::swap(&mut y, &mut y1);
            let k7c = k7.clone();
            k1.copy_from_slice(&k7c);
            t = t_new;
            let mut hn = h_new.min(opts.h_max);
            if reject {
                hn = hn.min(h);
            }
            reject = false;
            h = hn;
            if last {
                sol.y_end = y;
                sol.t1 = t;
                return Ok((sol, None));
            }
        } else {
            h /= (fac11 / 0.9).min(10.0);
            reject = true;
        }
    }
    if event.is_some() {
        return Err(Error::EventNotFound(t));
    }
    Err(Error::TooManySteps(opts.max_steps))
}

fn bisect_event<T: OdeScalar, G: Fn(f64, &[T]) -> f64>(
    sol: &DenseSolution<T>,
    g: &G,
    mut a: f64,
    mut b: f64,
    ga: f64,
    tol: f64,
) -> f64 {
    let sa = ga.signum();
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let gm = g(m, &sol.eval(m));
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn initial_step<T, F>(f: &mut F, t: f64, y: &[T], f0: &[T], dir: f64, opts: &OdeOptions, n_rhs: &mut usize) -> f64
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
{
    let n = y.len().max(1) as f64;
    let sc = |v: T| opts.atol + opts.rtol * v.modulus();
    let d0 = (y.iter().map(|&v| (v.modulus() / sc(v)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(y).map(|(&v, &yv)| (v.modulus() / sc(yv)).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<T> = y.iter().zip(f0).map(|(&a, &b)| a + b * (dir * h0)).collect();
    let mut f1 = vec![T::default(); y.len()];
    f(t + dir * h0, &y1, &mut f1);
    *n_rhs += 1;
    let d2 = (f1.iter().zip(f0).zip(y).map(|((&a, &b), &yv)| ((a - b).modulus() / sc(yv)).powi(2)).sum::<f64>() / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let sol = solve(|_, y: &[f64], dy: &mut [f64]| dy[0] = y[0], 0.0, &[1.0], 1.0, &OdeOptions::default()).unwrap();
        assert!((sol.final_state()[0] - 1f64.exp()).abs() < 1e-12);
        for &t in &[0.1, 0.37, 0.9] {
            assert!((sol.eval(t)[0] - f64::exp(t)).abs() < 1e-11);
        }
    }

    #[test]
    fn backward_in_time() {
        let sol = solve(|_, y: &[f64], dy: &mut [f64]| dy[0] = -y[0], 2.0, &[1.0], 0.0, &OdeOptions::default()).unwrap();
        assert!((sol.final_state()[0] - 2f64.exp()).abs() < 1e-11);
    }

    #[test]
    fn complex_rotation() {
        let i = Complex64::new(0.0, 1.0);
        let sol = solve(move |_, y: &[Complex64], dy: &mut [Complex64]| dy[0] = i * y[0], 0.0, &[Complex64::new(1.0, 0.0)], std::f64::consts::PI, &OdeOptions::default())
            .unwrap();
        assert!((sol.final_state()[0] + 1.0).norm() < 1e-11);
    }

    #[test]
    fn event_on_cosine() {
        let f = |_: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let (sol, te) = solve_until_event(f, 0.0, &[1.0, 0.0], 10.0, &OdeOptions::default(), |_, y| y[0], 1e-14).unwrap();
        let te = te.unwrap();
        assert!((te - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
        assert!(sol.final_state()[0].abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let r = solve(|_, _y: &[f64], dy: &mut [f64]| dy[0] = 1.0, 0.0, &[0.0], 1.0, &OdeOptions::with_tol(0.0));
        assert!(r.is_err());
    }
}
