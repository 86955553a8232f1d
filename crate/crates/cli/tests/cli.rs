use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vortexlab"))
}

fn run(sub: &str, config: Option<&Path>, out: &Path, extra: &[&str]) -> Output {
    let mut c = bin();
    c.arg(sub).arg("--out").arg(out).arg("--quiet");
    if let Some(p) = config {
        c.arg("--config").arg(p);
    }
    c.args(extra).output().expect("spawn")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn scenario_exchange_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run("scenario-run", None, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let events = read_json(&out.join("events.json"));
    let events = events.as_array().unwrap();
    assert_eq!(events.len(), 1);
    assert_eq!(events[0]["kind"], "exchange");
    let p = events[0]["fit"]["exponent"].as_f64().unwrap();
    assert!((p - 0.5).abs() <= 0.02, "{p}");

    let sep = std::fs::read_to_string(out.join("separation.csv")).unwrap();
    assert!(sep.starts_with("t,d\n"));
    assert!(!sep.contains('\r'));
    let tl = std::fs::read_to_string(out.join("timeline.csv")).unwrap();
    assert!(tl.starts_with("t,count,parity\n"));
    assert_eq!(tl.lines().count(), 34);
    let curves = std::fs::read_to_string(out.join("curves.csv")).unwrap();
    assert!(curves.starts_with("t,component_id,vertex_index,x,y,z\n"));
}

#[test]
fn constant_state_is_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"n": 16, "dt": 0.01, "t_end": 0.2, "records": 4, "write_snapshots": true}"#);
    let out = dir.path().join("run");
    let o = run("gp-evolve", Some(&cfg), &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("observables.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,mass,gl_energy"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(r[1], rows[0][1]);
        assert_eq!(r[2], 0.0);
    }
    assert!(out.join("snapshots/snap_0004.bin").exists());
}

#[test]
fn selftest_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run("selftest", None, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = read_json(&out.join("selftest.json"));
    assert_eq!(rep["failed"], 0);
    assert!(rep["passed"].as_u64().unwrap() >= 10);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let unknown = write_config(dir.path(), "a.json", r#"{"preset": "ring-death", "colour": 3}"#);
    assert_eq!(run("scenario-run", Some(&unknown), &out, &[]).status.code(), Some(2));
    let nested = write_config(dir.path(), "b.json", r#"{"extract": {"merge": 2}}"#);
    assert_eq!(run("scenario-run", Some(&nested), &out, &[]).status.code(), Some(2));
    let preset = write_config(dir.path(), "c.json", r#"{"preset": "trefoil"}"#);
    let o = run("scenario-run", Some(&preset), &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hyperbolic-exchange"));
    let grid = write_config(dir.path(), "d.json", r#"{"n": 24}"#);
    assert_eq!(run("gp-evolve", Some(&grid), &out, &[]).status.code(), Some(2));
    let o = bin().arg("scenario-run").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let missing = dir.path().join("nope.json");
    assert_eq!(run("torus-embed", Some(&missing), &out, &[]).status.code(), Some(4));
    let cfg = write_config(dir.path(), "a.json", r#"{"snapshots": ["/nonexistent/s.bin"]}"#);
    assert_eq!(run("vortex-analyze", Some(&cfg), &out, &[]).status.code(), Some(4));
}

#[test]
fn numerical_failure_writes_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    // two nodes per wavelength: the sampled plane wave fails the residual check
    let cfg = write_config(
        dir.path(),
        "a.json",
        r#"{"tau": -400.0, "ground_truth": {"kind": "plane_wave", "direction": [1, 0, 0]}, "resolution": {"target_per_axis": 6, "source_per_axis": 4}, "l0": []}"#,
    );
    let o = run("helmholtz-runge", Some(&cfg), &out, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let d = read_json(&out.join("diagnostic.json"));
    assert_eq!(d["subcommand"], "helmholtz-runge");
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["exit_code"], 3);
}

fn strip_timings(mut m: Value) -> Value {
    m.as_object_mut().unwrap().remove("timings");
    m
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"n": 16, "dt": 0.01, "t_end": 0.1, "records": 2, "write_snapshots": true, "initial": {"kind": "noise", "amplitude": 0.1}}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (out, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let o = run("gp-evolve", Some(&cfg), out, &["--seed", seed]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ma = read_json(&a.join("manifest.json"));
    let mb = read_json(&b.join("manifest.json"));
    let mc = read_json(&c.join("manifest.json"));
    assert_eq!(strip_timings(ma.clone()), strip_timings(mb));
    assert_ne!(ma["files"], mc["files"]);
    for f in ma["files"].as_array().unwrap() {
        let rel = f["path"].as_str().unwrap();
        assert_eq!(std::fs::read(a.join(rel)).unwrap(), std::fs::read(b.join(rel)).unwrap(), "{rel}");
    }
    assert!(ma["files"].as_array().unwrap().len() >= 9);
}

#[test]
fn snapshots_feed_vortex_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("scenario");
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"preset": "moving-ring", "plan": {"length": 2.0, "n": 32, "t_start": -0.05, "dt": 0.01, "steps": 10}, "write_snapshots": true}"#,
    );
    assert_eq!(run("scenario-run", Some(&cfg), &first, &[]).status.code(), Some(0));
    let cfg = write_config(
        dir.path(),
        "a.json",
        &format!(r#"{{"snapshot_dir": {:?}}}"#, first.join("snapshots").to_str().unwrap()),
    );
    let second = dir.path().join("analyze");
    let o = run("vortex-analyze", Some(&cfg), &second, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let tl = std::fs::read_to_string(second.join("timeline.csv")).unwrap();
    let counts: Vec<&str> = tl.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts.len(), 11);
    assert!(counts.iter().all(|c| *c == "1"), "{counts:?}");
    assert_eq!(read_json(&second.join("events.json")).as_array().unwrap().len(), 0);
}

#[test]
fn torus_errors_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run("torus-embed", None, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("torus_error.csv")).unwrap();
    let errs: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert_eq!(errs.len(), 3);
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn runge_writes_error_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write_config(dir.path(), "r.json", r#"{"tau": -1.0, "l0": [4, 8, 12, 20], "stability_trials": 4}"#);
    let o = run("helmholtz-runge", Some(&cfg), &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("runge_error.csv")).unwrap();
    let errs: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(errs.len(), 4);
    // the curve flattens at the Runge error once l0 resolves the source
    assert!(errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-3)), "{errs:?}");
    assert!(errs[0] > 2.0 * errs[3] && errs[3] <= 1e-2, "{errs:?}");
    let rep = read_json(&out.join("runge_report.json"));
    assert_eq!(rep["report"]["source_bound_holds"], true);
    assert!(rep["stability"].is_object());
}

#[test]
fn schema_lists_every_subcommand() {
    let o = bin().arg("schema").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    for sub in ["helmholtz-runge", "schrod-approx", "gp-evolve", "vortex-analyze", "scenario-run", "torus-embed", "selftest"] {
        let def = &s["$defs"][sub];
        assert_eq!(def["additionalProperties"], false, "{sub}");
    }
    let o = bin().arg("presets").output().unwrap();
    let p: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(p.as_array().unwrap().len(), 4);
}

#[test]
fn schrod_pipeline_meets_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run("schrod-approx", None, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = read_json(&out.join("schrod_report.json"));
    assert_eq!(rep["met"], true);
    assert!(rep["relative_error"].as_f64().unwrap() <= 0.05);
    let csv = std::fs::read_to_string(out.join("delta_sweep.csv")).unwrap();
    assert!(csv.starts_with("delta,error,relative_error,damping_error\n"));
}

#[test]
fn thread_cap_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"preset": "ring-death", "plan": {"length": 2.0, "n": 32, "t_start": -0.2, "dt": 0.01, "steps": 12}}"#,
    );
    let mut hashes = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = bin()
            .env("VORTEXLAB_THREADS", threads)
            .args(["scenario-run", "--quiet", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        hashes.push(read_json(&out.join("manifest.json"))["files"].clone());
    }
    assert_eq!(hashes[0], hashes[1]);
    let o = bin().env("VORTEXLAB_THREADS", "0").args(["selftest", "--out"]).arg(dir.path().join("x")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
