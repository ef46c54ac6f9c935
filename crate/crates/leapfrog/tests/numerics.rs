use leapfrog::numerics::ode::{solve, solve_until_event};
use leapfrog::numerics::spectral::node;
use leapfrog::numerics::{elliptic_e, elliptic_k, gauss_legendre, Axis, BoundaryField, GridField, OdeOptions};
use leapfrog::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Trapezoid rule on the periodic form `(1/4)∫₀^{2π} (1 − m sin²t)^{±1/2} dt`.
fn elliptic_oracle(m: f64, power: f64) -> f64 {
    let n = 4000;
    let h = TAU / n as f64;
    0.25 * h * (0..n).map(|k| (1.0 - m * (k as f64 * h).sin().powi(2)).powf(power)).sum::<f64>()
}

#[test]
fn agm_matches_periodic_quadrature() {
    for k in 1..=9 {
        let m = 0.1 * k as f64;
        let kk = elliptic_k(m).unwrap();
        let ee = elliptic_e(m).unwrap();
        assert!((kk - elliptic_oracle(m, -0.5)).abs() < 1e-12, "K({m})");
        assert!((ee - elliptic_oracle(m, 0.5)).abs() < 1e-12, "E({m})");
    }
    assert!((elliptic_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
    assert!(elliptic_k(1.0).is_err());
    assert!(elliptic_e(-0.1).is_err());
}

#[test]
fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
    for n in [1usize, 2, 5, 16, 64, 128] {
        let (x, w) = gauss_legendre(n);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        for deg in 0..(2 * n).min(40) {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
        }
    }
}

#[test]
fn dopri_solves_harmonic_oscillator() {
    let sol = solve(
        |_t, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        },
        0.0,
        &[1.0, 0.0],
        10.0,
        &OdeOptions::with_tol(1e-12),
    )
    .unwrap();
    let y = sol.final_state();
    assert!((y[0] - 10f64.cos()).abs() < 1e-10);
    assert!((y[1] + 10f64.sin()).abs() < 1e-10);
    // dense output between steps
    for t in [0.123, 3.3, 7.77] {
        let v = sol.eval(t);
        assert!((v[0] - t.cos()).abs() < 1e-10, "t={t}");
    }
}

#[test]
fn dopri_handles_complex_state() {
    let w = Complex64::new(0.3, 2.0);
    let sol = solve(|_t, y: &[Complex64], dy: &mut [Complex64]| dy[0] = w * y[0], 0.0, &[Complex64::new(1.0, 0.0)], 1.5, &OdeOptions::with_tol(1e-12))
        .unwrap();
    assert!((sol.final_state()[0] - (w * 1.5).exp()).norm() < 1e-10);
}

#[test]
fn event_location_is_sharp() {
    // y = cos t crosses zero at π/2
    let (sol, te) = solve_until_event(
        |_t, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        },
        0.0,
        &[1.0, 0.0],
        3.0,
        &OdeOptions::with_tol(1e-12),
        |_, y| y[0],
        1e-13,
    )
    .unwrap();
    let te = te.unwrap();
    assert!((te - FRAC_PI_2).abs() < 1e-11);
    assert!((sol.t1 - te).abs() < 1e-15);
}

#[test]
fn ode_rejects_invalid_options() {
    let r = solve(|_t, _y: &[f64], dy: &mut [f64]| dy[0] = 1.0, 0.0, &[0.0], 1.0, &OdeOptions::with_tol(-1.0));
    assert!(matches!(r, Err(Error::InvalidParameter(_))));
}

fn mode_field(np: usize, nt: usize, l: i64, j: i64) -> GridField {
    GridField::from_fn(np, nt, |p, t| (l as f64 * p + j as f64 * t).cos())
}

#[test]
fn derivatives_of_pure_modes() {
    let f = mode_field(16, 32, 3, 5);
    let s = f.to_spectral();
    let dth = s.derivative(Axis::Theta).to_grid();
    let dph = s.derivative(Axis::Phi).to_grid();
    let exp_th = GridField::from_fn(16, 32, |p, t| -5.0 * (3.0 * p + 5.0 * t).sin());
    let exp_ph = GridField::from_fn(16, 32, |p, t| -3.0 * (3.0 * p + 5.0 * t).sin());
    assert!(dth.sub(&exp_th).sup_norm() < 1e-12);
    assert!(dph.sub(&exp_ph).sup_norm() < 1e-12);
}

#[test]
fn hilbert_is_exact_on_pure_modes() {
    for (l, j) in [(0i64, 1i64), (2, 3), (-4, 7), (5, -2)] {
        let h = mode_field(16, 32, l, j).to_spectral().hilbert().to_grid();
        // ℋ cos(ℓφ + jθ) = −sign(j) sin(ℓφ + jθ)
        let exp = GridField::from_fn(16, 32, |p, t| -(j.signum() as f64) * (l as f64 * p + j as f64 * t).sin());
        assert!(h.sub(&exp).sup_norm() < 1e-14, "l={l} j={j}");
    }
    let c = mode_field(16, 32, 3, 0).to_spectral().hilbert().to_grid();
    assert!(c.sup_norm() < 1e-15);
}

#[test]
fn elliptic_inverse_rejects_mode_one_content() {
    let f = mode_field(8, 16, 1, 1).to_spectral();
    match f.invert_theta_elliptic(1e-12) {
        Err(Error::DegenerateMode { j, .. }) => assert_eq!(j.abs(), 1),
        other => panic!("expected a degenerate-mode error, got {other:?}"),
    }
}

#[test]
fn dealias_drops_high_modes() {
    let f = mode_field(32, 32, 0, 12).add(&mode_field(32, 32, 1, 3));
    let d = f.to_spectral().dealias().to_grid();
    assert!(d.sub(&mode_field(32, 32, 1, 3)).sup_norm() < 1e-13);
}

#[test]
fn boundary_field_json_round_trip() {
    let f = mode_field(8, 8, 1, 2).to_spectral();
    let s = serde_json::to_string(&f).unwrap();
    let back: BoundaryField = serde_json::from_str(&s).unwrap();
    assert_eq!(back, f);
    for (a, b) in back.coeffs.iter().zip(&f.coeffs) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
    }
}

fn arb_field(np: usize, nt: usize) -> impl Strategy<Value = GridField> {
    prop::collection::vec(-1.0f64..1.0, np * nt).prop_map(move |data| GridField { n_phi: np, n_theta: nt, data })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds(f in arb_field(8, 16)) {
        let s = f.to_spectral();
        prop_assert!((s.l2() - f.rms()).abs() <= 1e-12 * f.rms().max(1e-300));
        prop_assert!(s.to_grid().sub(&f).sup_norm() < 1e-13);
        prop_assert!(s.conjugate_symmetry_defect() < 1e-14);
    }

    #[test]
    fn elliptic_inverse_is_right_inverse(f in arb_field(8, 16)) {
        // project onto |j| ≥ 2 first
        let mut s = f.to_spectral();
        for l in -3i64..=4 {
            for j in -1i64..=1 {
                s.set_mode(l, j, Complex64::new(0.0, 0.0));
            }
            s.set_mode(l, 8, Complex64::new(0.0, 0.0));
        }
        let u = s.invert_theta_elliptic(1e-12).unwrap();
        let back = u.theta_elliptic();
        prop_assert!(back.sub(&s).coeffs.iter().all(|c| c.norm() < 1e-12));
        prop_assert!(u.has_zero_spatial_mean(1e-15));
        prop_assert!(u.mode_one_size() < 1e-15);
    }

    #[test]
    fn hilbert_squares_to_minus_identity_off_mean(f in arb_field(8, 16)) {
        let s = f.to_spectral();
        let hh = s.hilbert().hilbert();
        for l in -3i64..=4 {
            for j in -7i64..=7 {
                let expect = if j == 0 { Complex64::new(0.0, 0.0) } else { -s.mode(l, j) };
                prop_assert!((hh.mode(l, j) - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn legendre_relation(m in 0.01f64..0.99) {
        let (k, e) = (elliptic_k(m).unwrap(), elliptic_e(m).unwrap());
        let (kp, ep) = (elliptic_k(1.0 - m).unwrap(), elliptic_e(1.0 - m).unwrap());
        prop_assert!((e * kp + ep * k - k * kp - FRAC_PI_2).abs() < 1e-13);
    }
}

#[test]
fn node_spacing() {
    assert_eq!(node(0, 8), 0.0);
    assert!((node(4, 8) - PI).abs() < 1e-15);
}
