use std::path::Path;
use std::process::{Command, Output};

fn immse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_immse")).args(args).output().expect("binary runs")
}

fn golden(name: &str) -> Vec<u8> {
    std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn curve_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = immse(&["--threads", "1", "curve", "mmse", "--input", "binary", "--snr", "0:2:0.5", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&out).unwrap(), golden("curve_mmse_binary.csv"));
    assert!(dir.path().join("curve.csv.manifest.json").exists());
}

#[test]
fn gaussian_mi_curve() {
    let o = immse(&["curve", "mi", "--input", "gaussian", "--snr", "0:10:0.1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 101);
    let at_one: Vec<&str> = rows[10].split(',').collect();
    assert_eq!(at_one[0], "1");
    let v: f64 = at_one[1].parse().unwrap();
    assert!((v - 0.5 * 2f64.ln()).abs() < 1e-10);
}

#[test]
fn binary_mmse_at_zero_and_bits() {
    let o = immse(&["curve", "mmse", "--input", "binary", "--snr", "0"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().nth(1).unwrap(), "0,1,quadrature,1e-10");
    let o = immse(&["curve", "mi", "--input", "gaussian", "--snr", "3", "--bits"]);
    let line = String::from_utf8(o.stdout).unwrap().lines().nth(1).unwrap().to_string();
    let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-10, "{line}");
}

#[test]
fn telegraph_cmmse_is_monotone() {
    let o = immse(&["curve", "cmmse", "--telegraph", "nu=1", "--snr-db", "-5:20:0.5"]);
    assert!(o.status.success());
    let values: Vec<f64> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 51);
    assert!(values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn verify_matches_golden_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("thm9.json");
    let o = immse(&["--threads", "1", "verify", "thm9", "--a", "0.9", "--n", "50", "--snr", "1", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), golden("verify_thm9.json"));

    let o = immse(&["verify", "appendixE", "--xi", "-2"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], true);

    let o = immse(&["verify", "immse", "--input", "binary", "--tol", "1e-20"]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(immse(&["curve", "mi", "--input", "cauchy"]).status.code(), Some(2));
    assert_eq!(immse(&["curve", "cmmse", "--input", "binary"]).status.code(), Some(2));
    assert_eq!(immse(&["curve", "nonsense"]).status.code(), Some(2));
    assert_eq!(immse(&["simulate", "telegraph", "--dt", "1", "--out", "/tmp/unused-immse"]).status.code(), Some(2));
}

#[test]
fn simulate_dump_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = immse(&[
            "--threads", "1", "simulate", "telegraph", "--nu", "1", "--snr-db", "15", "--paths", "4", "--horizon", "0.01",
            "--seed", "7", "--dump", "--out", path_str(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let path = std::fs::read(a.join("path.csv")).unwrap();
    assert_eq!(path, std::fs::read(b.join("path.csv")).unwrap());
    assert_eq!(path, golden("simulate_path.csv"));
    let header = String::from_utf8(path).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 5);
    assert_eq!(std::fs::read(a.join("summary.json")).unwrap(), std::fs::read(b.join("summary.json")).unwrap());

    let o = immse(&["replay", path_str(&a.join("manifest.json")), "--out-dir", path_str(&dir.path().join("replayed"))]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn ensemble_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ens");
    let o = immse(&["simulate", "telegraph", "--paths", "2000", "--seed", "3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    for key in ["causal_at_horizon", "smoothed_at_midpoint", "anticausal_at_midpoint"] {
        assert!(s[key]["z"].as_f64().unwrap().abs() <= 3.0, "{key}: {}", s[key]);
    }
}

#[test]
fn constant_input_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("const");
    let o = immse(&["simulate", "constant-input", "--input", "binary", "--snr", "2", "--paths", "20000", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
