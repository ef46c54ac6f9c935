use crate::error::{Error, Result};
use crate::par;
use crate::pointvortex::{period_closed_form_raw, VortexParams};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Size of the exclusion window around a divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Radius {
    /// `λ/|j|^τ`.
    Lambda,
    /// `2λ/|j|^τ`.
    #[default]
    TwoLambda,
}

impl Radius {
    pub fn factor(self) -> f64 {
        match self {
            Radius::Lambda => 1.0,
            Radius::TwoLambda => 2.0,
        }
    }
}

/// Divisor `μ_{j,k} + ε²ω₀ℓ` at one point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DivisorValue {
    pub value: f64,
    pub radius: f64,
    pub excluded: bool,
}

/// `μ_{j,k}` for frequency ω: `j(½ − ε²(ω − εc₂)) − (k − 1) sign(j)/2`.
pub fn mu(j: i64, k: u8, eps: f64, omega: f64, c2: f64) -> f64 {
    let jf = j as f64;
    jf * (0.5 - eps * eps * (omega - eps * c2)) - (k as f64 - 1.0) * 0.5 * jf.signum()
}

fn omega_of(y0: f64, xi0: f64) -> Result<f64> {
    Ok(TAU / period_closed_form_raw(&VortexParams::new(y0, xi0, 0.0)?)?)
}

/// Evaluates the divisor for mode `(ℓ, j)` of family `k` at ξ₀.
#[allow(clippy::too_many_arguments)]
pub fn divisor(j: i64, l: i64, k: u8, xi0: f64, y0: f64, eps: f64, delta: f64, tau: f64, radius: Radius) -> Result<DivisorValue> {
    if j == 0 || !(k == 1 || k == 2) {
        return Err(Error::InvalidParameter(format!("divisor needs j != 0 and k in {{1, 2}}, got j={j} k={k}")));
    }
    let omega = omega_of(y0, xi0)?;
    let value = mu(j, k, eps, omega, 0.0) + eps * eps * omega * l as f64;
    let lambda = eps.powf(2.0 + delta);
    let r = radius.factor() * lambda / (j.unsigned_abs() as f64).powf(tau);
    Ok(DivisorValue { value, radius: r, excluded: value.abs() < r })
}

/// ω₀(ξ₀) on a uniform table with cubic Hermite interpolation, for fast inversion.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    pub y0: f64,
    pub xs: Vec<f64>,
    pub omega: Vec<f64>,
    pub domega: Vec<f64>,
}

impl FrequencyTable {
    pub fn new(y0: f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let xs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let rows: Vec<Result<(f64, f64)>> = par::map_slice(&xs, |&x| {
            let h = 1e-3 * x;
            let w = |d: f64| omega_of(y0, x + d);
            let dw = (-w(2.0 * h)? + 8.0 * w(h)? - 8.0 * w(-h)? + w(-2.0 * h)?) / (12.0 * h);
            Ok((w(0.0)?, dw))
        });
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        if rows.iter().any(|r| r.1 >= 0.0) {
            return Err(Error::SelfCheck("frequency is not decreasing on the table".into()));
        }
        Ok(FrequencyTable { y0, xs, omega: rows.iter().map(|r| r.0).collect(), domega: rows.iter().map(|r| r.1).collect() })
    }

    fn hermite(&self, s: usize, x: f64) -> (f64, f64) {
        let (x0, x1) = (self.xs[s], self.xs[s + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (f0, f1, d0, d1) = (self.omega[s], self.omega[s + 1], self.domega[s] * h, self.domega[s + 1] * h);
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * d1;
        let dv = ((6.0 * t2 - 6.0 * t) * f0 + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (-6.0 * t2 + 6.0 * t) * f1 + (3.0 * t2 - 2.0 * t) * d1) / h;
        (v, dv)
    }

    /// ξ₀ with ω₀(ξ₀) = ω, searching segments `[s_lo, s_hi)`.
    /// Assumes ω lies within the table range of those segments.
    fn invert_in(&self, omega: f64, s_lo: usize, s_hi: usize) -> f64 {
        // omega is decreasing in xi
        let (mut a, mut b) = (s_lo, s_hi);
        while b - a > 1 {
            let m = (a + b) / 2;
            if self.omega[m] > omega {
                a = m;
            } else {
                b = m;
            }
        }
        let s = a;
        let (x0, x1) = (self.xs[s], self.xs[s + 1]);
        let (f0, f1) = (self.omega[s], self.omega[s + 1]);
        let mut x = x0 + (x1 - x0) * ((omega - f0) / (f1 - f0)).clamp(0.0, 1.0);
        for _ in 0..4 {
            let (v, dv) = self.hermite(s, x);
            x = (x - (v - omega) / dv).clamp(x0, x1);
        }
        x
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let h = self.xs[1] - self.xs[0];
        let s = (((x - self.xs[0]) / h).floor() as isize).clamp(0, n as isize - 2) as usize;
        self.hermite(s, x).0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CantorConfig {
    pub y0: f64,
    pub eps: f64,
    pub delta: f64,
    pub tau: f64,
    pub lo: f64,
    pub hi: f64,
    pub j_max: i64,
    pub radius: Radius,
    /// Points of the singular set; their σ-neighbourhoods are removed as well.
    pub singular_roots: Vec<f64>,
    pub sigma: f64,
    /// Number of excluded intervals to keep in the report.
    pub max_records: usize,
    pub table_size: usize,
    pub chunks: usize,
}

impl CantorConfig {
    pub fn new(y0: f64, eps: f64, lo: f64, hi: f64) -> Self {
        CantorConfig {
            y0,
            eps,
            delta: 0.1,
            tau: 2.0,
            lo,
            hi,
            j_max: 512,
            radius: Radius::TwoLambda,
            singular_roots: Vec::new(),
            sigma: 1e-3 * y0,
            max_records: 1000,
            table_size: 4097,
            chunks: 256,
        }
    }

    fn validate(&self) -> Result<()> {
        VortexParams::new(self.y0, self.lo, self.eps)?;
        VortexParams::new(self.y0, self.hi, self.eps)?;
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.lo < self.hi) {
            return bad("cantor interval needs lo < hi");
        }
        if !(self.eps > 0.0) {
            return bad("cantor sampling needs eps > 0");
        }
        if !(self.tau > 1.0) || !(self.delta >= 0.0) {
            return bad("cantor sampling needs tau > 1 and delta >= 0");
        }
        if self.j_max < 2 || self.table_size < 4 || self.chunks == 0 || self.chunks >= self.table_size {
            return bad("cantor sampling needs j_max >= 2, table_size >= 4 and 0 < chunks < table_size");
        }
        if !(self.sigma >= 0.0) {
            return bad("sigma must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExcludedInterval {
    pub l: i64,
    pub j: i64,
    pub k: u8,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorScan {
    pub config: CantorConfig,
    pub lambda: f64,
    pub interval_length: f64,
    /// Measure of the union of all excluded sets.
    pub measure: f64,
    /// Measure of the union of the divisor intervals alone.
    pub diophantine_measure: f64,
    /// Measure of the union of the σ-neighbourhoods alone.
    pub singular_measure: f64,
    pub n_intervals: u64,
    pub records: Vec<ExcludedInterval>,
    pub records_truncated: bool,
    /// Estimated measure of the intervals with |j| > j_max.
    pub tail_estimate: f64,
    pub truncation_warning: bool,
}

fn union_length(iv: &mut [(f64, f64)]) -> f64 {
    iv.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for &(a, b) in iv.iter() {
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((ca, cb)) = cur {
        total += cb - ca;
    }
    total
}

struct ChunkResult {
    dioph: f64,
    singular: f64,
    total: f64,
    count: u64,
    edge_raw: f64,
    records: Vec<ExcludedInterval>,
}

fn scan_chunk(cfg: &CantorConfig, table: &FrequencyTable, s_lo: usize, s_hi: usize, lambda: f64) -> ChunkResult {
    let (xa, xb) = (table.xs[s_lo], table.xs[s_hi]);
    let (w_hi, w_lo) = (table.omega[s_lo], table.omega[s_hi]);
    let e2 = cfg.eps * cfg.eps;
    let mut iv: Vec<(f64, f64)> = Vec::new();
    let mut records = Vec::new();
    let mut edge_raw = 0.0;
    let mut whole = false;
    for k in 1u8..=2 {
        let j_min = if k == 1 { 1 } else { 2 };
        for ja in j_min..=cfg.j_max {
            for j in [ja, -ja] {
                let c = mu(j, k, cfg.eps, 0.0, 0.0);
                let rho = cfg.radius.factor() * lambda / (ja as f64).powf(cfg.tau);
                if c.abs() < rho {
                    whole = true;
                    continue;
                }
                // ε²ω m + c ∈ (−ρ, ρ) with ω > 0 needs sign(m) = −sign(c)
                let sgn = -c.signum();
                let m_lo = ((c.abs() - rho) / (e2 * w_hi)).ceil().max(1.0) as i64;
                let m_hi = ((c.abs() + rho) / (e2 * w_lo)).floor() as i64;
                for ma in m_lo..=m_hi {
                    let mf = ma as f64;
                    // ω interval for |m| = ma
                    let o1 = ((c.abs() - rho) / (e2 * mf)).max(w_lo);
                    let o2 = ((c.abs() + rho) / (e2 * mf)).min(w_hi);
                    if o1 >= o2 {
                        continue;
                    }
                    let x1 = table.invert_in(o2, s_lo, s_hi).max(xa);
                    let x2 = table.invert_in(o1, s_lo, s_hi).min(xb);
                    if x2 <= x1 {
                        continue;
                    }
                    iv.push((x1, x2));
                    if ja == cfg.j_max {
                        edge_raw += x2 - x1;
                    }
                    if records.len() < cfg.max_records {
                        let m = sgn as i64 * ma;
                        records.push(ExcludedInterval { l: m + j, j, k, lo: x1, hi: x2 });
                    }
                }
            }
        }
    }
    let count = iv.len() as u64;
    let width = xb - xa;
    let dioph = if whole { width } else { union_length(&mut iv) };
    let mut sing: Vec<(f64, f64)> = cfg
        .singular_roots
        .iter()
        .map(|&r| ((r - cfg.sigma).max(xa), (r + cfg.sigma).min(xb)))
        .filter(|(a, b)| b > a)
        .collect();
    let singular = union_length(&mut sing);
    let total = if whole {
        width
    } else {
        iv.extend(sing);
        union_length(&mut iv)
    };
    ChunkResult { dioph, singular, total, count, edge_raw, records }
}

/// Measure of the ξ₀ values in `[lo, hi]` excluded by the divisor conditions up to `|j| ≤ j_max`,
/// together with the σ-neighbourhoods of the singular set.
///
/// For each `(j, k)` the admissible `m = ℓ − j` are enumerated exactly from the range of ω₀, so
/// no cap on `ℓ` is needed.
pub fn cantor_measure(cfg: &CantorConfig) -> Result<DivisorScan> {
    cfg.validate()?;
    let table = FrequencyTable::new(cfg.y0, cfg.lo, cfg.hi, cfg.table_size)?;
    let lambda = cfg.eps.powf(2.0 + cfg.delta);
    let segs = cfg.table_size - 1;
    let bounds: Vec<(usize, usize)> = (0..cfg.chunks).map(|c| (c * segs / cfg.chunks, (c + 1) * segs / cfg.chunks)).filter(|(a, b)| b > a).collect();
    let parts = par::map_slice(&bounds, |&(a, b)| scan_chunk(cfg, &table, a, b, lambda));
    let mut scan = DivisorScan {
        config: cfg.clone(),
        lambda,
        interval_length: cfg.hi - cfg.lo,
        measure: 0.0,
        diophantine_measure: 0.0,
        singular_measure: 0.0,
        n_intervals: 0,
        records: Vec::new(),
        records_truncated: false,
        tail_estimate: 0.0,
        truncation_warning: false,
    };
    let mut edge = 0.0;
    for p in parts {
        scan.measure += p.total;
        scan.diophantine_measure += p.dioph;
        scan.singular_measure += p.singular;
        scan.n_intervals += p.count;
        edge += p.edge_raw;
        for r in p.records {
            if scan.records.len() < cfg.max_records {
                scan.records.push(r);
            } else {
                scan.records_truncated = true;
            }
        }
    }
    if scan.n_intervals as usize > scan.records.len() {
        scan.records_truncated = true;
    }
    // per-|j| measure decays like |j|^{−τ}; sum the tail past j_max
    scan.tail_estimate = edge * cfg.j_max as f64 / (cfg.tau - 1.0);
    scan.truncation_warning = scan.tail_estimate > 0.1 * scan.measure.max(f64::MIN_POSITIVE);
    Ok(scan)
}
