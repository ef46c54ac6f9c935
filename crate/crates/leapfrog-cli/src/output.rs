use crate::config::RunConfig;
use leapfrog::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

/// Floats at 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

fn io_err(e: std::io::Error, what: &str) -> Error {
    Error::InvalidParameter(format!("cannot write {what}: {e}"))
}

impl Output {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(&cfg.out).map_err(|e| io_err(e, &cfg.out.display().to_string()))?;
        Ok(Output { dir: cfg.out.clone(), files: Vec::new() })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), body).map_err(|e| io_err(e, name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// CSV where every cell is already formatted.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut s = header.join(",");
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.text(name, &s)
    }

    pub fn csv_f64(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        self.csv(name, header, rows.into_iter().map(|r| r.into_iter().map(num).collect()))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let body = serde_json::to_string_pretty(value).map_err(|e| Error::SelfCheck(format!("json: {e}")))?;
        self.text(name, &(body + "\n"))
    }

    pub fn manifest(mut self, command: &str, cfg: &RunConfig, summary: serde_json::Value) -> Result<()> {
        let files = std::mem::take(&mut self.files);
        let m = serde_json::json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "config_hash": config_hash(cfg),
            "parallel": leapfrog::par::is_parallel(),
            "files": files,
            "summary": summary,
            "timestamp_unix": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        });
        self.json("manifest.json", &m)
    }
}

/// SHA-256 of the canonical JSON form of the config. `out` and `threads` do not change
/// results, so they are left out.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Some(m) = v.as_object_mut() {
        m.remove("out");
        m.remove("threads");
    }
    let canon = v.to_string();
    Sha256::digest(canon.as_bytes()).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}
