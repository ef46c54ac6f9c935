use crate::config::{RunConfig, XiRange};
use crate::output::{num, Output};
use crate::Command;
use leapfrog::contour::{
    approx_solution, g0_series, g_residual, patch_diagnostics, simulate_patches, A1Form, PatchGeometry, PsiQuadrature,
    SimulationConfig,
};
use leapfrog::monodromy::{
    cantor_measure, det_identity, exp_a0, exp_a0_numeric, fundamental_matrix, singular_scan, CantorConfig, CMatrix4, ModeOneSystem,
};
use leapfrog::numerics::{BoundaryField, GridField};
use leapfrog::pointvortex::{
    frequency_profile, hamiltonian, integrate_orbit, period_bounds, period_quadrature, polar_deviation_bound, solve_q_theta,
};
use leapfrog::{Error, Result, VortexParams};
use serde_json::json;
use std::f64::consts::TAU;
use std::process::ExitCode;

pub fn run(name: &str, cmd: &Command, cfg: &RunConfig) -> Result<ExitCode> {
    let mut out = Output::new(cfg)?;
    out.text("config.toml", &cfg.to_text())?;
    let summary = match cmd {
        Command::Orbit => orbit(cfg, &mut out)?,
        Command::Period => period(cfg, &mut out)?,
        Command::Qtheta => qtheta(cfg, &mut out)?,
        Command::G0 => g0(cfg, &mut out)?,
        Command::Approx => approx(cfg, &mut out)?,
        Command::Simulate => simulate(cfg, &mut out)?,
        Command::Monodromy => monodromy(cfg, &mut out)?,
        Command::ScanSingular => scan(cfg, &mut out)?,
        Command::Cantor => cantor(cfg, &mut out)?,
        Command::Verify { only } => {
            let results = leapfrog::verify::run_checks(only);
            for r in &results {
                println!("criterion {:>2}: {} ({:.1}s) {}: {}", r.id, if r.passed { "PASS" } else { "FAIL" }, r.seconds, r.name, r.detail);
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            out.json("verify.json", &results)?;
            out.manifest(name, cfg, json!({ "checks": results.len(), "failed": failed }))?;
            return Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(4) });
        }
    };
    out.manifest(name, cfg, summary)?;
    Ok(ExitCode::SUCCESS)
}

fn range_or(cfg: &RunConfig, default: &str) -> Result<XiRange> {
    match cfg.range()? {
        Some(r) => Ok(r),
        None => crate::config::parse_range(default),
    }
}

fn orbit(cfg: &RunConfig, out: &mut Output) -> Result<serde_json::Value> {
    let p = cfg.params()?;
    let t = period_quadrature(&p)?;
    let traj = integrate_orbit(&p, cfg.periods * t, cfg.tol)?;
    let rows: Vec<Vec<f64>> = traj
        .sample(cfg.samples)
        .iter()
        .map(|s| Ok(vec![s.t, s.eta, s.xi, s.x0, hamiltonian(s.eta, s.xi, p.y0)?]))
        .collect::<Result<_>>()?;
    out.csv_f64("orbit.csv", &["t", "eta", "xi", "x0", "H"], rows)?;
    Ok(json!({ "period": t, "max_hamiltonian_drift": traj.max_hamiltonian_drift(), "steps": traj.solution.n_steps() }))
}

fn period(cfg: &RunConfig, out: &mut Output) -> Result<serde_json::Value> {
    let r = range_or(cfg, "0.05:0.65:13")?;
    let xs: Vec<f64> = r.points().iter().map(|x| x * cfg.y0).collect();
    let rows = frequency_profile(cfg.y0, &xs)?;
    let mut all_ok = true;
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            let (lo, hi) = period_bounds(&VortexParams { y0: cfg.y0, xi0: row.xi0, eps: 0.0 });
            let ok = lo <= row.period && row.period <= hi;
            all_ok &= ok;
            vec![num(row.xi0), num(row.period), num(row.omega0), num(row.domega), num(lo), num(hi), ok.to_string()]
        })
        .collect();
    out.csv("period.csv", &["xi0", "T", "omega0", "domega", "T_lower", "T_upper", "bounds_ok"], cells)?;
    Ok(json!({ "rows": rows.len(), "bounds_ok": all_ok }))
}

fn qtheta(cfg: &RunConfig, out: &mut Output) -> Result<serde_json::Value> {
    let p = cfg.params()?;
    let (n_phi, _) = cfg.grid_sizes()?;
    let o = solve_q_theta(&p, n_phi)?;
    let rows = (0..n_phi).map(|k| vec![o.phi(k), o.q[k], o.theta_big[k], o.theta_dot[k]]);
    out.csv_f64("qtheta.csv", &["phi", "q", "theta", "theta_dot"], rows)?;
    Ok(json!({
        "omega0": o.omega0, "period": o.period, "closure_gap": o.closure_gap,
        "symmetry_gap": o.symmetry_gap, "deviation_bound": polar_deviation_bound(&p),
    }))
}

fn geometry(cfg: &RunConfig, p: &VortexParams) -> Result<(PatchGeometry, usize)> {
    let (n_phi, n_theta) = cfg.grid_sizes()?;
    Ok((PatchGeometry::new(solve_q_theta(p, n_phi)?, cfg.kmax)?, n_theta))
}

fn field_rows(fields: &[&GridField]) -> Vec<Vec<f64>> {
    let f0 = fields[0];
    let mut rows = Vec::with_capacity(f0.data.len());
    for i in 0..f0.n_phi {
        for j in 0..f0.n_theta {
            let mut r = vec![TAU * i as f64 / f0.n_phi as f64, TAU * j as f64 / f0.n_theta as f64];
            r.extend(fields.iter().map(|f| f.at(i, j)));
            rows.push(r);
        }
    }
    rows
}

fn g0(cfg: &RunConfig, out: &mut Output) -> Result<serde_json::Value> {
    let p = cfg.params()?;
    let (geom, nt) = geometry(cfg, &p)?;
    let zero = GridField::zeros(geom.n_phi(), nt);
    let quad = g_residual(p.eps, &zero, &geom, &PsiQuadrature::default())?;
    let series = g0_series(p.eps, &geom, nt, cfg.kmax)?;
    let diff = quad.sub(&series.field).sup_norm();
    out.csv_f64("g0.csv", &["phi", "theta", "quadrature", "series"], field_rows(&[&quad, &series.field]))?;
    Ok(json!({
        "eps": p.eps, "sup_difference": diff, "series_tail_bound": series.tail_bound,
        "pole_distance": geom.pole_distance(), "pole_bounds_hold": geom.pole_bounds_hold(1e-12),
    }))
}

fn approx(cfg: &RunConfig, out: &mut Output) -> Result<serde_json::Value> {
    let p = cfg.params()?;
    let (geom, nt) = geometry(cfg, &p)?;
    let quad = PsiQuadrature::default();
    let zero = GridField::zeros(geom.n_phi(), nt);
    let es = [p.eps, 0.5 * p.eps, 0.25 * p.eps];
    let mut rows = Vec::new();
    for (k, &eps) in es.iter().enumerate() {
        let ap = approx_solution(eps, &geom, nt, cfg.kmax, A1Form::Full)?;
        if k == 0 {
            out.json("r_eps.json", &BoundaryField::from_grid(&ap.r_eps))?;
        }
        let n0 = g_residual(eps, &zero, &geom, &quad)?.sup_norm();
        let n1 = g_residual(eps, &ap.r_eps.scale(eps), &geom, &quad)?.sup_norm();
        rows.push(vec![eps, n0, n1]);
    }
    let fit = |c: usize| {
        let lx: Vec<f64> = rows.iter().map(|r| r[0].ln()).collect();
        let ly: Vec<f64> = rows.iter().map(|r| r[c].ln()).collect();
        let (mx, my) = (lx.iter().sum::<f64>() / 3.0, ly.iter().sum::<f64>() / 3.0);
        lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
    };
    let (s0, s1) = (fit(1), fit(2));
    out.csv_f64("approx.csv", &["eps", "residual_zero", "residual_r_eps"], rows)?;
    Ok(json!({ "slope_zero": s0, "slope_r_eps": s1 }))
}

fn simulate(cfg: &RunConfig, out: &mut Output) -> Result<serde_json::Value> {
    let p = cfg.params()?;
    let (geom, nt) = geometry(cfg, &p)?;
    let ap = approx_solution(p.eps, &geom, nt, cfg.kmax, A1Form::Full)?;
    let t = geom.orbit.period;
    let sim_cfg = SimulationConfig { t_end: cfg.periods * t, ..SimulationConfig::default() };
    let rep = simulate_patches(&p, &geom.orbit, &ap.r_eps.scale(p.eps), &sim_cfg)?;
    let diag = patch_diagnostics(&rep, &geom.orbit, &geom.a[2], cfg.tol)?;
    for (k, s) in rep.snapshots.iter().enumerate() {
        let rows: Vec<Vec<String>> = s
            .gamma
            .iter()
            .enumerate()
            .flat_map(|(patch, b)| b.iter().enumerate().map(move |(i, z)| vec![(patch + 1).to_string(), i.to_string(), num(z.re), num(z.im)]))
            .collect();
        out.csv(&format!("snapshot_{k:03}.csv"), &["patch", "k", "x", "y"], rows)?;
        if cfg.plot_data {
            let mut body = format!("# t = {}\n", num(s.t));
            for b in &s.gamma {
                for z in b.iter().chain(b.first()) {
                    body.push_str(&format!("{} {}\n", num(z.re), num(z.im)));
                }
                body.push('\n');
            }
            out.text(&format!("snapshot_{k:03}.dat"), &body)?;
        }
    }
    if cfg.plot_data {
        let mut body = String::from("# t x1 y1 x2 y2\n");
        for (tt, c) in rep.times.iter().zip(&rep.centroids) {
            body.push_str(&format!("{} {} {} {} {}\n", num(*tt), num(c[0].re), num(c[0].im), num(c[1].re), num(c[1].im)));
        }
        out.text("centroids.dat", &body)?;
    }
    let crossings = rep.x_gap_crossings(0.125 * t, (0.125 + 1.0) * t);
    out.json(
        "simulation.json",
        &json!({
            "times": rep.times, "centroids": rep.centroids, "areas": rep.areas,
            "diagnostics": diag, "period": t, "steps": rep.steps,
        }),
    )?;
    Ok(json!({
        "max_area_drift": rep.max_area_drift(), "max_centroid_error": diag.max_centroid_error,
        "x_gap_crossings": crossings, "period": t, "steps": rep.steps,
    }))
}

fn monodromy(cfg: &RunConfig, out: &mut Output) -> Result<serde_json::Value> {
    let p = cfg.params()?;
    let sys = ModeOneSystem { tol: cfg.tol, ..ModeOneSystem::new(&p)? };
    let rep = fundamental_matrix(&sys)?;
    let e = exp_a0(TAU);
    let numeric = exp_a0_numeric(TAU, 1e-13)?;
    let a0_checks = json!({
        "det_identity_2pi": det_identity(TAU),
        "det_integrated_2pi": (numeric - CMatrix4::identity()).determinant(),
        "closed_form_vs_integrated": (numeric - e).iter().map(|z| z.norm()).fold(0.0, f64::max),
        "distance_to_exp_a0_over_xi0_sq": (rep.matrix() - e).norm() / (p.xi0 * p.xi0 / (p.y0 * p.y0)),
    });
    out.json("monodromy.json", &json!({ "report": rep, "a0": a0_checks }))?;
    Ok(json!({ "det_gap": rep.det_gap, "structure_ok": rep.structure_ok }))
}

fn scan(cfg: &RunConfig, out: &mut Output) -> Result<serde_json::Value> {
    let r = range_or(cfg, "0.1:0.6:501")?;
    let s = singular_scan(cfg.y0, r.lo * cfg.y0, r.hi * cfg.y0, r.n, cfg.tol)?;
    out.csv_f64("singular.csv", &["xi0", "det_gap_re", "det_gap_im"], s.samples.iter().map(|(x, g)| vec![*x, g.re, g.im]))?;
    out.json("singular_roots.json", &s.roots)?;
    Ok(json!({ "roots": s.roots.len() }))
}

fn cantor(cfg: &RunConfig, out: &mut Output) -> Result<serde_json::Value> {
    let r = range_or(cfg, "0.1:0.3:201")?;
    if r.n < 2 {
        return Err(Error::InvalidParameter("cantor range needs n >= 2 (used for the singular scan)".into()));
    }
    let (lo, hi) = (r.lo * cfg.y0, r.hi * cfg.y0);
    let roots = singular_scan(cfg.y0, lo, hi, r.n, 1e-10)?.roots.iter().map(|r| r.xi0).collect();
    let cc = CantorConfig {
        delta: cfg.delta,
        tau: cfg.tau,
        j_max: cfg.j_max,
        radius: cfg.radius()?,
        singular_roots: roots,
        sigma: cfg.sigma * cfg.y0,
        ..CantorConfig::new(cfg.y0, cfg.eps, lo, hi)
    };
    let scan = cantor_measure(&cc)?;
    if scan.truncation_warning {
        eprintln!("warning: estimated tail past j_max ({:.3e}) exceeds 10% of the measure", scan.tail_estimate);
    }
    out.json("cantor_intervals.json", &scan.records)?;
    let summary = json!({
        "eps": cfg.eps, "delta": cfg.delta, "tau": cfg.tau, "measure": scan.measure,
        "diophantine_measure": scan.diophantine_measure, "singular_measure": scan.singular_measure,
        "interval_length": scan.interval_length, "lambda": scan.lambda, "radius": cfg.radius,
        "n_intervals": scan.n_intervals, "records_truncated": scan.records_truncated,
        "tail_estimate": scan.tail_estimate, "truncation_warning": scan.truncation_warning,
    });
    out.json("cantor_summary.json", &summary)?;
    Ok(summary)
}
