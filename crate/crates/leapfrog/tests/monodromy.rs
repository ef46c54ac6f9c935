use leapfrog::monodromy::{
    a0_matrix, cantor_measure, det_identity, divisor, exp_a0, fundamental_matrix, mu, singular_scan, solve_mode_one, CMatrix4,
    CantorConfig, ModeOneSystem, Radius,
};
use leapfrog::{Error, VortexParams};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;
use std::sync::OnceLock;

/// Taylor series with scaling and squaring.
fn expm(a: &CMatrix4) -> CMatrix4 {
    let s = 8;
    let b = a.scale(0.5f64.powi(s));
    let (mut sum, mut term) = (CMatrix4::identity(), CMatrix4::identity());
    for k in 1..30 {
        term = term * b / Complex64::new(k as f64, 0.0);
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

fn max_diff(a: &CMatrix4, b: &CMatrix4) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn closed_form_exponential_matches_taylor() {
    let a0 = a0_matrix();
    for k in 0..32 {
        let phi = TAU * k as f64 / 32.0;
        let e = exp_a0(phi);
        assert!(max_diff(&e, &expm(&a0.scale(phi))) < 1e-12, "phi={phi}");
        let d = (e - CMatrix4::identity()).determinant();
        assert!((d.re - det_identity(phi)).abs() < 1e-12 && d.im.abs() < 1e-12, "phi={phi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponential_is_a_group(s in -10.0f64..10.0, t in -10.0f64..10.0) {
        prop_assert!(max_diff(&exp_a0(s + t), &(exp_a0(s) * exp_a0(t))) < 1e-12);
    }

    #[test]
    fn mu_at_zero_size_is_half_integer(j in -50i64..50, k in 1u8..=2) {
        prop_assume!(j != 0);
        let expect = 0.5 * j as f64 - 0.5 * (k as f64 - 1.0) * (j as f64).signum();
        prop_assert_eq!(mu(j, k, 0.0, 3.0, 1.0), expect);
    }
}

#[test]
fn monodromy_is_unimodular_and_real() {
    for xi0 in [0.2, 0.35, 0.5] {
        let rep = fundamental_matrix(&ModeOneSystem::new(&VortexParams::new(1.0, xi0, 0.0).unwrap()).unwrap()).unwrap();
        // tr A vanishes, so det M = 1 by Liouville
        let det = rep.matrix().determinant();
        assert!((det - 1.0).norm() < 1e-9, "xi0={xi0}: det {det}");
        assert!(rep.structure_ok, "xi0={xi0}: defect {:e}", rep.structure_defect);
        assert!(rep.max_norm.is_finite() && rep.max_norm >= 2.0 - 1e-12);
    }
}

#[test]
fn small_separation_approaches_the_limit_system() {
    let rep = fundamental_matrix(&ModeOneSystem::new(&VortexParams::new(1.0, 0.01, 0.0).unwrap()).unwrap()).unwrap();
    let d = max_diff(&rep.matrix(), &exp_a0(TAU));
    assert!(d < 1e-2, "distance {d:e}");
}

fn scan() -> &'static leapfrog::monodromy::SingularScan {
    static SCAN: OnceLock<leapfrog::monodromy::SingularScan> = OnceLock::new();
    SCAN.get_or_init(|| singular_scan(1.0, 0.1, 0.6, 51, 1e-10).unwrap())
}

#[test]
fn singular_set_has_two_isolated_roots() {
    let s = scan();
    let xs: Vec<f64> = s.roots.iter().map(|r| r.xi0).collect();
    assert_eq!(xs.len(), 2, "{xs:?}");
    assert!((xs[0] - 0.1519).abs() < 1e-3 && (xs[1] - 0.4393).abs() < 1e-3, "{xs:?}");
    assert!(s.roots.iter().all(|r| r.slope.abs() > 1e-3));
    // the grid values bracket each root
    for r in &s.roots {
        let k = s.samples.iter().position(|(x, _)| *x > r.xi0).unwrap();
        assert!(s.samples[k - 1].1.re * s.samples[k].1.re < 0.0);
    }
}

fn forcing(n: usize) -> Vec<[Complex64; 4]> {
    (0..n)
        .map(|k| {
            let p = TAU * k as f64 / n as f64;
            [Complex64::from_polar(1.0, p), Complex64::new(p.cos(), 0.0), Complex64::from_polar(0.5, -2.0 * p), Complex64::new(0.0, (3.0 * p).sin())]
        })
        .collect()
}

#[test]
fn mode_one_solve_refuses_near_singular_points() {
    let root = scan().roots[0].xi0;
    let sys = ModeOneSystem::new(&VortexParams::new(1.0, root + 2e-4, 0.0).unwrap()).unwrap();
    match solve_mode_one(&sys, &forcing(32), Some(scan()), 1e-3) {
        Err(Error::NearSingular(_)) => {}
        other => panic!("expected a near-singular refusal, got {other:?}"),
    }
}

#[test]
fn mode_one_solve_is_linear_and_periodic() {
    let sys = ModeOneSystem::new(&VortexParams::new(1.0, 0.3, 0.0).unwrap()).unwrap();
    let zero = vec![[Complex64::new(0.0, 0.0); 4]; 32];
    let z = solve_mode_one(&sys, &zero, Some(scan()), 1e-3).unwrap();
    assert!(z.h.iter().flatten().all(|v| v.norm() < 1e-15));
    let f = forcing(32);
    let a = solve_mode_one(&sys, &f, Some(scan()), 1e-3).unwrap();
    assert!(a.residual < 1e-8 && a.periodicity_gap < 1e-8);
    let f2: Vec<[Complex64; 4]> = f.iter().map(|r| r.map(|v| v * 2.0)).collect();
    let b = solve_mode_one(&sys, &f2, Some(scan()), 1e-3).unwrap();
    for (x, y) in a.h.iter().flatten().zip(b.h.iter().flatten()) {
        assert!((2.0 * x - y).norm() < 1e-8);
    }
}

fn small_cantor(eps: f64) -> CantorConfig {
    CantorConfig { j_max: 48, table_size: 513, chunks: 16, delta: 0.3, tau: 1.5, ..CantorConfig::new(1.0, eps, 0.1, 0.3) }
}

#[test]
fn excluded_intervals_are_where_the_divisor_is_small() {
    let cfg = small_cantor(0.1);
    let rep = cantor_measure(&cfg).unwrap();
    assert!(!rep.records.is_empty());
    for r in rep.records.iter().take(200) {
        let mid = 0.5 * (r.lo + r.hi);
        let d = divisor(r.j, r.l, r.k, mid, 1.0, cfg.eps, cfg.delta, cfg.tau, cfg.radius).unwrap();
        assert!(d.excluded, "{r:?}: {d:?}");
    }
    assert!(rep.measure <= rep.interval_length);
    assert!(rep.diophantine_measure <= rep.measure + 1e-15);
    assert!(rep.measure <= rep.diophantine_measure + rep.singular_measure + 1e-15);
}

#[test]
fn excluded_measure_grows_with_radius_and_modes() {
    let base = cantor_measure(&small_cantor(0.1)).unwrap().measure;
    let narrow = cantor_measure(&CantorConfig { radius: Radius::Lambda, ..small_cantor(0.1) }).unwrap().measure;
    let more = cantor_measure(&CantorConfig { j_max: 96, ..small_cantor(0.1) }).unwrap().measure;
    assert!(narrow <= base && base <= more, "{narrow} {base} {more}");
    let roots = scan().roots.iter().map(|r| r.xi0).collect::<Vec<_>>();
    let with_roots = cantor_measure(&CantorConfig { singular_roots: roots, ..small_cantor(0.1) }).unwrap();
    assert!(with_roots.measure >= base && with_roots.singular_measure > 0.0);
}

#[test]
fn cantor_rejects_bad_configs() {
    assert!(cantor_measure(&CantorConfig { tau: 1.0, ..small_cantor(0.1) }).is_err());
    assert!(cantor_measure(&CantorConfig { lo: 0.3, hi: 0.1, ..small_cantor(0.1) }).is_err());
    assert!(cantor_measure(&small_cantor(0.0)).is_err());
    assert!(divisor(0, 1, 1, 0.2, 1.0, 0.1, 0.1, 2.0, Radius::Lambda).is_err());
    assert!(divisor(1, 1, 3, 0.2, 1.0, 0.1, 0.1, 2.0, Radius::Lambda).is_err());
}
