// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "leapfrog", version, about = "Leapfrogging vortex quartets: orbits, patch functional, monodromy and scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Point-vortex trajectory over the requested number of periods.
    Orbit,
    /// Period table over a ξ₀ range with bounds.
    Period,
    /// Polar orbit (q, Θ) on the φ grid.
    Qtheta,
    /// Functional at the unperturbed discs: quadrature vs series.
    G0,
    /// Approximate solution r_ε and residual slopes.
    Approx,
    /// Contour-dynamics simulation of the four patches.
    Simulate,
    /// Monodromy matrix report and the A₀ checks.
    Monodromy,
    /// Roots of det(M₀(2π) − Id) over a ξ₀ range.
    ScanSingular,
    /// Excluded measure of the Diophantine conditions.
    Cantor,
    /// Runs the acceptance checks and reports pass/fail.
    Verify {
        /// Only run these check numbers (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Orbit => "orbit",
            Command::Period => "period",
            Command::Qtheta => "qtheta",
            Command::G0 => "g0",
            Command::Approx => "approx",
            Command::Simulate => "simulate",
            Command::Monodromy => "monodromy",
            Command::ScanSingular => "scan-singular",
            Command::Cantor => "cantor",
            Command::Verify { .. } => "verify",
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
struct Flags {
    /// Key-value configuration file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    y0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    xi0: Option<f64>,
    /// lo:hi:n
    #[arg(long, global = true)]
    xi0_range: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// N_PHIxN_THETA
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    kmax: Option<usize>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write gnuplot-ready data files.
    #[arg(long, global = true)]
    plot_data: bool,
    /// Simulation / orbit length in periods.
    #[arg(long, global = true)]
    periods: Option<f64>,
    /// Number of trajectory samples.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    j_max: Option<i64>,
    /// lambda or two-lambda
    #[arg(long, global = true)]
    radius: Option<String>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
}

fn merge(flags: &Flags) -> leapfrog::Result<RunConfig> {
    let mut c = match &flags.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = flags.$f.clone() { c.$f = v; } )* };
    }
    set!(y0, xi0, eps, grid, tol, kmax, delta, tau, out, periods, samples, j_max, radius, sigma);
    if let Some(r) = flags.xi0_range.clone() {
        c.xi0_range = Some(r);
    }
    if let Some(t) = flags.threads {
        c.threads = Some(t);
    }
    c.plot_data |= flags.plot_data;
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = merge(&cli.flags).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            leapfrog::par::init_threads(n);
        }
        commands::run(cli.command.name(), &cli.command, &cfg)
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let kind = if e.is_validation() { "validation" } else { "numerical" };
            let record = serde_json::json!({ "error": { "kind": kind, "command": cli.command.name(), "message": e.to_string() } });
            eprintln!("{record}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
