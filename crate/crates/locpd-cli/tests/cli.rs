use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("locpd-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn locpd(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locpd"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("LOCPD_OUT_DIR")
        .output()
        .unwrap()
}

fn report(out: &Path, stem: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{stem}.json"))).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn analyze_f6_three_points_has_rank_two() {
    let d = scratch("f6");
    let o = locpd(&d, &["analyze", "--fn", "F6", "--points", "0,0.39,0.65"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&d, "analyze");
    assert_eq!(r["result"]["rank"], 2);
    // cos(x - y) = cos x cos y + sin x sin y has rank two: a 2×2 minor is
    // nonzero and the 3×3 determinant vanishes
    let p = [0.0f64, 0.39, 0.65];
    let g = |i: usize, j: usize| (p[i] - p[j]).cos();
    let minor = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    let det = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
        + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
    assert!(minor > 1e-2 && det.abs() < 1e-14);
    let ev: Vec<f64> = r["result"]["eigenvalues"].as_array().unwrap().iter().map(num).collect();
    assert!((ev.iter().sum::<f64>() - 3.0).abs() < 1e-12);
}

#[test]
fn analyze_rank_and_psd_verdicts() {
    let d = scratch("ranks");
    assert!(locpd(&d, &["analyze", "--fn", "e1", "--points", "5@uniform"]).status.success());
    assert_eq!(report(&d, "analyze")["result"]["rank"], 1);
    assert!(locpd(&d, &["analyze", "--fn", "F2"]).status.success());
    let r = report(&d, "analyze");
    assert_eq!(r["result"]["is_psd"], true);
    assert_eq!(r["result"]["points"].as_array().unwrap().len(), 16);
}

#[test]
fn spectrum_examples() {
    let d = scratch("spectrum");
    assert!(locpd(&d, &["spectrum", "--fn", "E", "--a", "0.5", "--N", "512"]).status.success());
    let r = report(&d, "spectrum")["result"].clone();
    let l1 = num(&r["top_eigenvalues"][0]);
    assert!((l1 * PI * PI - 1.0).abs() < 1e-3);
    assert!((num(&r["trace"]) - 0.125).abs() < 1e-6);
    assert_eq!(r["top_eigenvalues"].as_array().unwrap().len(), 10);

    assert!(locpd(&d, &["spectrum", "--fn", "F2", "--N", "512"]).status.success());
    assert!((num(&report(&d, "spectrum")["result"]["trace"]) - 0.5).abs() < 1e-6);

    // the extension equals 1 at the origin, so the trace is the interval length
    assert!(locpd(&d, &["spectrum", "--fn", "F3ext", "--a", "2", "--N", "256"]).status.success());
    assert!((num(&report(&d, "spectrum")["result"]["trace"]) - 2.0).abs() < 1e-6);
}

#[test]
fn deficiency_table() {
    let d = scratch("deficiency");
    let o = locpd(&d, &["deficiency", "--fn", "F1..F6", "--format", "csv"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(d.join("deficiency.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    let want = ["F1,0,0", "F2,1,1", "F3,1,1", "F4,0,0", "F5,0,0", "F6,0,0"];
    for (r, w) in rows.iter().zip(want) {
        assert!(r.starts_with(w), "{r} vs {w}");
    }
    assert_eq!(rows.len(), 6);
}

#[test]
fn check_ext_verdicts_and_exit_codes() {
    let d = scratch("checkext");
    let mu = d.join("mu3.json");
    std::fs::write(&mu, r#"{"density": {"kind": "cauchy", "params": {"scale": 1.0}, "tail": 2}}"#).unwrap();
    let o = locpd(&d, &["check-ext", "--measure", mu.to_str().unwrap(), "--fn", "F3"]);
    assert!(o.status.success());
    assert_eq!(report(&d, "check_ext")["result"]["verdict"], "in_ext");

    let o = locpd(&d, &["check-ext", "--measure", "mu5", "--fn", "F3", "--n-cut", "256"]);
    assert!(o.status.success());
    assert_eq!(report(&d, "check_ext")["result"]["verdict"], "rejected");

    // with 16 terms the truncation alone can explain the residual
    let o = locpd(&d, &["check-ext", "--measure", "mu3", "--fn", "F3", "--n-cut", "16"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(report(&d, "check_ext")["result"]["verdict"], "inconclusive");
}

#[test]
fn extend_reports_density_verdicts() {
    let d = scratch("extend");
    assert!(locpd(&d, &["extend", "--fn", "F2", "--c", "2", "--mode", "to_zero", "--format", "svg"]).status.success());
    let r = report(&d, "extend")["result"].clone();
    assert_eq!(r["pd_verified"], true);
    assert!((num(&r["density"]["at_zero"]) - 3.0 / (4.0 * PI)).abs() < 1e-15);
    let svg = std::fs::read_to_string(d.join("extend.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline") && svg.contains("config_hash="));

    assert!(locpd(&d, &["extend", "--fn", "F4", "--c", "0.75"]).status.success());
    assert_eq!(report(&d, "extend")["result"]["pd_verified"], false);
}

#[test]
fn order_f2_below_f3() {
    let d = scratch("order");
    assert!(locpd(&d, &["order", "--k", "F2", "--fn", "F3"]).status.success());
    assert_eq!(report(&d, "order")["result"]["report"]["dominated"], "yes");
}

#[test]
fn simulate_is_reproducible() {
    let d1 = scratch("sim1");
    let d2 = scratch("sim2");
    let args = ["simulate", "bridge", "--paths", "20000", "--seed", "7", "--format", "csv"];
    assert!(locpd(&d1, &args).status.success());
    assert!(locpd(&d2, &args).status.success());
    for f in ["simulate.json", "simulate.csv", "manifest.json"] {
        let a = std::fs::read(d1.join(f)).unwrap();
        let b = std::fs::read(d2.join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let r = report(&d1, "simulate");
    assert_eq!(r["result"]["passes"], true);
    assert_eq!(r["seed"], 7);
    let csv = std::fs::read_to_string(d1.join("simulate.csv")).unwrap();
    let header = csv.lines().nth(1).unwrap();
    assert_eq!(header.split(',').count(), 17);
    // floats are written with 17 significant digits and round-trip
    let cell = csv.lines().nth(5).unwrap().split(',').nth(1).unwrap();
    let mantissa = cell.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17);
    let v: f64 = cell.parse().unwrap();
    assert_eq!(format!("{v:.16e}"), cell);

    let o = locpd(&d1, &["simulate", "bridge", "--paths", "20000", "--seed", "8"]);
    assert!(o.status.success());
    assert_ne!(report(&d1, "simulate")["config_hash"], r["config_hash"]);
}

#[test]
fn manifest_records_hash_seed_and_versions() {
    let d = scratch("manifest");
    assert!(locpd(&d, &["order", "--k", "F2", "--fn", "F3", "--seed", "5"]).status.success());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(d.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "order");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["config_hash"], report(&d, "order")["config_hash"]);
    assert!(m["versions"]["locpd"].is_string() && m["versions"]["locpd-cli"].is_string());
}

#[test]
fn config_file_overrides_flags() {
    let d = scratch("config");
    let cfg = d.join("run.json");
    std::fs::write(&cfg, r#"{"command": "analyze", "points": "0,0.39,0.65", "format": "csv"}"#).unwrap();
    let o = locpd(&d, &["analyze", "--fn", "F6", "--points", "8@uniform", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&d, "analyze")["result"]["points"].as_array().unwrap().len(), 3);
    assert!(d.join("analyze.csv").exists());

    std::fs::write(&cfg, r#"{"command": "spectrum"}"#).unwrap();
    let o = locpd(&d, &["analyze", "--fn", "F6", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&cfg, r#"{"pionts": "0,0.1"}"#).unwrap();
    let o = locpd(&d, &["analyze", "--fn", "F6", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let d = scratch("env");
    let o = Command::new(env!("CARGO_BIN_EXE_locpd"))
        .args(["analyze", "--fn", "F2", "--points", "4@uniform"])
        .env("LOCPD_OUT_DIR", &d)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(d.join("analyze.json").exists() && d.join("manifest.json").exists());
}

#[test]
fn configuration_errors_exit_with_two() {
    let d = scratch("errors");
    assert_eq!(locpd(&d, &["analyze", "--fn", "F9"]).status.code(), Some(2));
    assert_eq!(locpd(&d, &["analyze", "--fn", "F2", "--tol=-1"]).status.code(), Some(2));
    assert_eq!(locpd(&d, &["analyze", "--fn", "F2", "--points", "0,0.7"]).status.code(), Some(2));
    assert_eq!(locpd(&d, &["simulate", "bm", "--paths", "10"]).status.code(), Some(2));
    assert_eq!(locpd(&d, &["simulate", "levy"]).status.code(), Some(2));
    assert_eq!(locpd(&d, &["extend", "--fn", "F1", "--c", "1.5"]).status.code(), Some(2));
}
