use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn leapfrog(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leapfrog"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn period_table_has_default_rows_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = leapfrog(dir.path(), &["period"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("period.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "xi0,T,omega0,domega,T_lower,T_upper,bounds_ok");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 13);
    for r in &rows {
        let v: Vec<f64> = r[..6].iter().map(|s| s.parse().unwrap()).collect();
        assert!(v[4] <= v[1] && v[1] <= v[5]);
        assert!((v[2] * v[1] - std::f64::consts::TAU).abs() < 1e-12);
        assert!(v[3] < 0.0);
        assert_eq!(r[6], "true");
    }
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "period");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert!(m["files"].as_array().unwrap().iter().any(|f| f == "period.csv"));
}

#[test]
fn monodromy_reports_the_determinant_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = leapfrog(dir.path(), &["monodromy", "--xi0", "0.5", "--eps", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("monodromy.json"));
    let text = v.to_string();
    assert!(text.contains("det_gap"));
    assert!(text.contains("structure_ok"));
}

#[test]
fn invalid_input_exits_with_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["period", "--xi0", "0.8"][..], &["orbit", "--grid", "100x64"], &["cantor", "--radius", "huge"], &["scan-singular", "--xi0-range", "0.3:0.1:5"]] {
        let out = leapfrog(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
        assert_eq!(err["error"]["kind"], "validation", "{args:?}");
        assert_eq!(err["error"]["command"], args[0]);
    }
}

#[test]
fn runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["orbit", "--xi0", "0.3", "--samples", "64"];
    assert!(leapfrog(a.path(), &args).status.success());
    assert!(leapfrog(b.path(), &args).status.success());
    let x = std::fs::read(a.path().join("orbit.csv")).unwrap();
    let y = std::fs::read(b.path().join("orbit.csv")).unwrap();
    assert_eq!(x, y);
    assert_eq!(String::from_utf8(x).unwrap().lines().count(), 66);
    let (ma, mb) = (read_json(&a.path().join("manifest.json")), read_json(&b.path().join("manifest.json")));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "xi0_range = \"0.1:0.3:5\"\nxi0 = 0.25\n").unwrap();
    let out = leapfrog(dir.path(), &["period", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("period.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let out = leapfrog(dir.path(), &["period", "--config", cfg.to_str().unwrap(), "--xi0-range", "0.1:0.3:3"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("period.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    // the effective config is written back
    let written = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert!(written.contains("0.1:0.3:3") && written.contains("xi0 = 0.25"));

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(leapfrog(dir.path(), &["period", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_runs_selected_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = leapfrog(dir.path(), &["verify", "--only", "1,2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), 2);
    let v = read_json(&dir.path().join("verify.json"));
    assert_eq!(v.as_array().unwrap().len(), 2);
}
