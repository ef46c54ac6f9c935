use leapfrog::contour::simulate::{area, centroid, radial_modes, self_intersects};
use leapfrog::contour::{
    approx_solution, g0_series, g_field, g_residual, psi_eval, psi_sum, simulate_patches, A1Form, PatchGeometry, PsiQuadrature,
    SimulationConfig,
};
use leapfrog::numerics::GridField;
use leapfrog::pointvortex::{integrate_orbit, solve_q_theta};
use leapfrog::VortexParams;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

fn geometry(xi0: f64, n_phi: usize) -> PatchGeometry {
    PatchGeometry::new(solve_q_theta(&VortexParams::new(1.0, xi0, 0.1).unwrap(), n_phi).unwrap(), 20).unwrap()
}

fn ellipse(a: f64, b: f64, c: Complex64, n: usize) -> Vec<Complex64> {
    (0..n).map(|k| c + Complex64::new(a * (TAU * k as f64 / n as f64).cos(), b * (TAU * k as f64 / n as f64).sin())).collect()
}

#[test]
fn curve_helpers_on_an_ellipse() {
    let c = Complex64::new(0.3, -1.2);
    let z = ellipse(0.2, 0.1, c, 128);
    assert!((area(&z) - PI * 0.02).abs() < 1e-14);
    assert!((centroid(&z) - c).norm() < 1e-14);
    assert!(!self_intersects(&z));
    // a circle of radius 0.1 has only the mean radial mode
    let m = radial_modes(&ellipse(0.1, 0.1, c, 64), c, 0.1, 4);
    assert!((m[0].re - 1.0).abs() < 1e-13);
    assert!(m[1..].iter().all(|v| v.norm() < 1e-13));
    let eight: Vec<Complex64> =
        (0..64).map(|k| TAU * k as f64 / 64.0).map(|t| Complex64::new(t.sin(), (2.0 * t).sin() * 0.5)).collect();
    assert!(self_intersects(&eight));
}

#[test]
fn pole_bounds_hold_along_the_orbit() {
    for xi0 in [0.15, 0.4, 0.6] {
        let g = geometry(xi0, 64);
        assert!(g.pole_bounds_hold(1e-12), "xi0={xi0}");
        assert!(g.pole_distance() > 0.0 && g.pole_distance() <= xi0 + 1e-12);
    }
}

#[test]
fn series_respects_its_margin() {
    let g = geometry(0.5, 64);
    let rho = g.pole_distance();
    assert!(g0_series(0.34 * rho, &g, 32, 20).is_err());
    let s = g0_series(0.1, &g, 32, 20).unwrap();
    assert!(s.tail_bound < 1e-12);
}

#[test]
fn zero_patch_residual_matches_the_series() {
    let g = geometry(0.5, 64);
    let quad = PsiQuadrature::default();
    let zero = GridField::zeros(64, 64);
    for eps in [0.05, 0.1] {
        let direct = g_residual(eps, &zero, &g, &quad).unwrap();
        let series = g0_series(eps, &g, 64, 20).unwrap().field;
        assert!(direct.sub(&series).sup_norm() < 1e-6, "eps={eps}");
    }
}

#[test]
fn psi_sum_is_the_sum_of_its_parts() {
    let g = geometry(0.4, 64);
    let quad = PsiQuadrature::new(32);
    let eps = 0.08;
    let r = g_field(&g, 32).scale(eps);
    let total = psi_sum(eps, &r, &g, &quad).unwrap();
    let parts = (1..=4).map(|n| psi_eval(n, eps, &r, &g, &quad).unwrap()).reduce(|a, b| a.add(&b)).unwrap();
    assert!(total.sub(&parts).sup_norm() < 1e-13);
    assert!(psi_eval(0, eps, &r, &g, &quad).is_err());
    assert!(psi_eval(5, eps, &r, &g, &quad).is_err());
}

#[test]
fn approximate_solution_has_no_spatial_mean() {
    let g = geometry(0.5, 64);
    let ap = approx_solution(0.1, &g, 64, 20, A1Form::Full).unwrap();
    for f in [&ap.r0, &ap.r1, &ap.r_eps, &ap.g] {
        assert!(f.spatial_means().iter().all(|m| m.abs() < 1e-14));
        assert!(f.to_spectral().mode_one_size() < 1e-12);
    }
    let res = g_residual(0.1, &ap.r_eps.scale(0.1), &g, &PsiQuadrature::default()).unwrap();
    assert!(res.spatial_means().iter().all(|m| m.abs() < 1e-12));
}

#[test]
fn rotation_term_changes_the_correction() {
    let g = geometry(0.5, 64);
    let full = approx_solution(0.1, &g, 64, 20, A1Form::Full).unwrap();
    let bare = approx_solution(0.1, &g, 64, 20, A1Form::WithoutRotation).unwrap();
    assert!(full.r0.sub(&bare.r0).sup_norm() == 0.0);
    // A₁ differs by ω₀Θ̇ ∂θ𝚐, which is O(1)
    assert!(full.a1.sub(&bare.a1).sup_norm() > 0.1);
}

#[test]
fn simulation_swaps_the_patches_after_half_a_period() {
    let eps = 0.1;
    let p = VortexParams::new(1.0, 0.5, eps).unwrap();
    let orbit = solve_q_theta(&p, 64).unwrap();
    let g = PatchGeometry::new(orbit.clone(), 20).unwrap();
    let ap = approx_solution(eps, &g, 64, 20, A1Form::Full).unwrap();
    let half = 0.5 * orbit.period;
    let cfg = SimulationConfig { t_end: half, snapshots: 2, ..Default::default() };
    let rep = simulate_patches(&p, &orbit, &ap.r_eps.scale(eps), &cfg).unwrap();
    assert!(rep.max_area_drift() < 1e-6);
    let x0 = integrate_orbit(&p, half, 1e-12).unwrap().final_state().x0;
    let start = &rep.snapshots[0];
    let end = rep.snapshots.last().unwrap().translated(x0);
    assert!((end.t - half).abs() < 1e-12);
    // patch 1 at T/2 sits where patch 2 started, with the same shape
    let c1 = centroid(&end.gamma[0]);
    let c2 = centroid(&start.gamma[1]);
    assert!((c1 - c2).norm() < 5.0 * eps * eps, "centroids {c1} vs {c2}");
    let m1 = radial_modes(&end.gamma[0], c1, eps, 3);
    let m2 = radial_modes(&start.gamma[1], c2, eps, 3);
    assert!((m1[2].norm() - m2[2].norm()).abs() < eps * eps);
    // the lower patches are mirror images
    for (a, b) in end.gamma[0].iter().rev().zip(&end.gamma[2]) {
        assert_eq!(a.conj(), *b);
    }
}

#[test]
fn simulation_needs_a_positive_size() {
    let p = VortexParams::new(1.0, 0.5, 0.0).unwrap();
    let orbit = solve_q_theta(&p, 64).unwrap();
    let r = GridField::zeros(64, 32);
    assert!(simulate_patches(&p, &orbit, &r, &SimulationConfig::default()).is_err());
}
