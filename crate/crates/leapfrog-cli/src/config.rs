use leapfrog::{Error, Result, VortexParams};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Every knob of a run. Loaded from a key-value file and then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub y0: f64,
    pub xi0: f64,
    /// `lo:hi:n` in units of y0, used by the scan commands.
    pub xi0_range: Option<String>,
    pub eps: f64,
    /// `N_PHIxN_THETA`.
    pub grid: String,
    pub tol: f64,
    pub kmax: usize,
    pub delta: f64,
    pub tau: f64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub plot_data: bool,
    /// Simulation length in periods.
    pub periods: f64,
    pub samples: usize,
    pub j_max: i64,
    /// `lambda` or `two-lambda`.
    pub radius: String,
    /// Half width of the excluded neighbourhood around singular roots, in units of y0.
    pub sigma: f64,
    /// No random seeds are used anywhere; kept so the manifest states it.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            y0: 1.0,
            xi0: 0.5,
            xi0_range: None,
            eps: 0.1,
            grid: "128x128".into(),
            tol: 1e-12,
            kmax: 20,
            delta: 0.3,
            tau: 1.5,
            out: PathBuf::from("out"),
            threads: None,
            plot_data: false,
            periods: 1.125,
            samples: 512,
            j_max: 512,
            radius: "two-lambda".into(),
            sigma: 1e-3,
            deterministic: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl XiRange {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64).collect()
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

pub fn parse_range(s: &str) -> Result<XiRange> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(invalid(format!("xi0 range must be lo:hi:n, got {s:?}")));
    }
    let f = |p: &str| p.trim().parse::<f64>().map_err(|_| invalid(format!("bad number {p:?} in xi0 range")));
    let (lo, hi) = (f(parts[0])?, f(parts[1])?);
    let n: usize = parts[2].trim().parse().map_err(|_| invalid(format!("bad count {:?} in xi0 range", parts[2])))?;
    if n == 0 || !(lo <= hi) || (n > 1 && lo == hi) {
        return Err(invalid(format!("xi0 range {s:?} needs lo < hi and n >= 1")));
    }
    Ok(XiRange { lo, hi, n })
}

pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| invalid(format!("grid must be NxM, got {s:?}")))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|_| invalid(format!("bad grid size {v:?}")));
    let (n_phi, n_theta) = (p(a)?, p(b)?);
    if n_phi < 64 || !n_phi.is_power_of_two() || n_theta < 8 || n_theta % 2 != 0 {
        return Err(invalid(format!("grid {s:?} needs a power-of-two N >= 64 and an even M >= 8")));
    }
    Ok((n_phi, n_theta))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn params(&self) -> Result<VortexParams> {
        VortexParams::new(self.y0, self.xi0, self.eps)
    }

    pub fn range(&self) -> Result<Option<XiRange>> {
        self.xi0_range.as_deref().map(parse_range).transpose()
    }

    pub fn grid_sizes(&self) -> Result<(usize, usize)> {
        parse_grid(&self.grid)
    }

    pub fn radius(&self) -> Result<leapfrog::monodromy::Radius> {
        match self.radius.as_str() {
            "lambda" => Ok(leapfrog::monodromy::Radius::Lambda),
            "two-lambda" => Ok(leapfrog::monodromy::Radius::TwoLambda),
            other => Err(invalid(format!("radius must be lambda or two-lambda, got {other:?}"))),
        }
    }

    /// Re-checks every constraint; called once after flags are merged.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.grid_sizes()?;
        self.radius()?;
        if let Some(r) = self.range()? {
            // the range is in units of y0
            VortexParams::new(self.y0, r.lo * self.y0, self.eps)?;
            VortexParams::new(self.y0, r.hi * self.y0, self.eps)?;
        }
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return Err(invalid(format!("tol must be in (0, 1e-2), got {}", self.tol)));
        }
        if self.kmax < 2 {
            return Err(invalid("kmax must be at least 2".into()));
        }
        if !(self.tau > 1.0) || !(self.delta >= 0.0) {
            return Err(invalid("need tau > 1 and delta >= 0".into()));
        }
        if !(self.periods > 0.0) || self.samples == 0 || self.j_max < 2 || !(self.sigma >= 0.0) {
            return Err(invalid("need periods > 0, samples > 0, j_max >= 2 and sigma >= 0".into()));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be positive".into()));
        }
        Ok(())
    }
}
