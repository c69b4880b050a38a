use std::path::Path;
use std::process::{Command, Output};

fn gsqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsqc")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_layout_is_a_usage_error() {
    let out = gsqc(&["gap-scan", "--layout", "ring"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown layout"));
}

#[test]
fn runtime_errors_are_structured() {
    let out = gsqc(&["build", "--M", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("invalid circuit"));
    let out = gsqc(&["gap-scan", "--lambda-grid", "0:2:3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn chain_certificate_from_phi_file() {
    let dir = tempfile::tempdir().unwrap();
    let phi = dir.path().join("chain_phi.json");
    std::fs::write(&phi, "[-1, -1, -1, 1, 1, 1]").unwrap();
    let cert = dir.path().join("cert.json");
    let out = gsqc(&[
        "certify-path",
        "--graph",
        "chain",
        "--n1",
        "6",
        "--phi-file",
        phi.to_str().unwrap(),
        "--paths",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&cert);
    let bound = v["bound"].as_f64().unwrap();
    assert!((bound - 2.0 / 169.0).abs() < 1e-15);
    assert_eq!(v["horizon"], 6);
    assert!(v["paths"].is_array());
}

#[test]
fn build_roundtrips_through_circuit_flag() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    let out = gsqc(&["build", "--layout", "all-to-all", "--random-gates", "--seed", "3", "--out", c.to_str().unwrap()]);
    assert!(out.status.success());
    let again = gsqc(&["build", "--layout", "custom", "--circuit", c.to_str().unwrap()]);
    assert!(again.status.success());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), std::fs::read_to_string(&c).unwrap());
}

#[test]
fn gap_scan_csv_shape() {
    let out = gsqc(&["gap-scan", "--lambda-grid", "0.9:1:2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "lambda,e0,e1_full,gap,e1_thm3,occupation,bound_thm3,bound_thm4");
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("1,"));
    assert!(rows[1].ends_with(",4.2511765131e-7"));
}

#[test]
fn spectrum_lists_k_values() {
    let out = gsqc(&["spectrum", "--lambda", "0.5", "--k", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("index,eigenvalue\n0,"));
}

#[test]
fn evolve_toy_csv() {
    let out = gsqc(&["evolve", "--toy", "1", "--time", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,lambda,overlap_with_instantaneous_ground,norm\n0,0,"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fidelity"));
}

#[test]
fn thread_cap_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_gsqc"))
            .args(["gap-scan", "--lambda-grid", "0:1:5"])
            .env("GSQC_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run("zero").status.code(), Some(1));
}

#[test]
fn verify_covers_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = gsqc(&["verify", "--layout", "1d", "--M", "3", "--n", "2", "--out", report.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    let v = json(&report);
    assert_eq!(v["ok"], true);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for want in [
        "ground-state",
        "occupations",
        "gap-ordering",
        "gauge-identity",
        "swap-chain",
        "output-probability",
        "path-certificates",
        "adiabatic",
    ] {
        assert!(names.contains(&want), "verify report lacks {want}: {names:?}");
    }
    assert!(text.contains("evaluated only, not simulated"));
}
