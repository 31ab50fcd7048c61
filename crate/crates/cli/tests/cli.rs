use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fockline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockline"))
        .args(args)
        .output()
        .expect("spawn fockline")
}

fn stdout(args: &[&str]) -> String {
    let out = fockline(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn preset(name: &str) -> String {
    let p: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "..",
        "presets",
        &format!("heralded-singlet.{name}.json"),
    ]
    .iter()
    .collect();
    p.to_str().unwrap().to_string()
}

/// Data rows of a sweep CSV, parsed; empty cells become `None`.
fn csv_rows(text: &str) -> Vec<Vec<Option<f64>>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# fockline "));
    assert_eq!(
        lines.next().unwrap(),
        "epsilon,eta,p_coincidence,fidelity,bound_1m4e2,bound_eta,p1,p2,p3,p_im"
    );
    lines
        .map(|l| {
            l.split(',')
                .map(|c| {
                    if c.is_empty() {
                        None
                    } else {
                        Some(c.parse().unwrap())
                    }
                })
                .collect()
        })
        .collect()
}

#[test]
fn run_reports_high_fidelity() {
    let v = json(&["run", "--epsilon", "0.05", "--eta", "1.0"]);
    assert_eq!(v["meta"]["command"], "run");
    assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["report"]["fidelity"].as_f64().unwrap() > 0.997);
    assert_eq!(v["report"]["config"]["mode"], "strict");
}

#[test]
fn run_without_tilt_has_no_herald() {
    let v = json(&["run", "--epsilon", "0", "--eta", "1.0"]);
    assert_eq!(v["report"]["p_coincidence"].as_f64(), Some(0.0));
    assert!(v["report"]["fidelity"].is_null());
    let csv = stdout(&["run", "--epsilon", "0", "--format", "csv"]);
    assert_eq!(csv_rows(&csv)[0][3], None);
}

#[test]
fn lenient_run_is_tagged() {
    let v = json(&[
        "run",
        "--epsilon",
        "0.05",
        "--eta",
        "0.5",
        "--coincidence",
        "lenient",
    ]);
    assert_eq!(v["report"]["config"]["mode"], "lenient");
    assert_eq!(v["meta"]["config"]["coincidence"], "lenient");
    let strict = json(&["run", "--epsilon", "0.05", "--eta", "0.5"]);
    assert!(v["report"]["p_coincidence"].as_f64() > strict["report"]["p_coincidence"].as_f64());
}

#[test]
fn sweep_rows_dominate_the_bound() {
    let rows = csv_rows(&stdout(&[
        "sweep",
        "--epsilon",
        "0.01:0.2:20",
        "--eta",
        "1",
    ]));
    assert_eq!(rows.len(), 20);
    for r in &rows {
        assert!(r[3].unwrap() >= r[4].unwrap());
    }
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
}

#[test]
fn sweep_over_eta_scales_quadratically() {
    let rows = csv_rows(&stdout(&[
        "sweep",
        "--epsilon",
        "0.05",
        "--eta",
        "0.1:1:10",
    ]));
    let full = rows.last().unwrap()[2].unwrap();
    for r in &rows {
        let eta = r[1].unwrap();
        assert!((r[2].unwrap() / (eta * eta * full) - 1.0).abs() < 0.01);
    }
}

#[test]
fn single_point_sweep_matches_run() {
    let sweep = csv_rows(&stdout(&[
        "sweep",
        "--epsilon",
        "0.05:0.05:1",
        "--eta",
        "0.5",
    ]));
    let run = csv_rows(&stdout(&[
        "run",
        "--epsilon",
        "0.05",
        "--eta",
        "0.5",
        "--format",
        "csv",
    ]));
    assert_eq!(sweep, run);
    let v = json(&["run", "--epsilon", "0.05", "--eta", "0.5"]);
    assert_eq!(sweep[0][2], v["report"]["p_coincidence"].as_f64());
    assert_eq!(sweep[0][3], v["report"]["fidelity"].as_f64());
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let args = [
        "sweep",
        "--epsilon",
        "0.01:0.1:7",
        "--eta",
        "0.5:1:3",
        "--format",
        "json",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_fockline"))
        .args(args)
        .env("FOCKLINE_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_fockline"))
        .args(args)
        .env("FOCKLINE_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_fockline"))
        .args(args)
        .env("FOCKLINE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sweep_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let printed = stdout(&["sweep", "--epsilon", "0.02:0.04:3"]);
    let silent = stdout(&[
        "sweep",
        "--epsilon",
        "0.02:0.04:3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(silent.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
}

#[test]
fn components_single_out_the_singlet_term() {
    let v = json(&["components", "--epsilon", "0.05", "--format", "json"]);
    let rows = v["report"]["components"].as_array().unwrap();
    let x0 = rows.iter().find(|r| r["label"] == "X0").unwrap();
    assert_eq!(
        x0["prior"].as_f64(),
        v["report"]["analytics"]["p1"].as_f64()
    );
    let second: Vec<&Value> = rows.iter().filter(|r| r["order"] == 2).collect();
    assert_eq!(second.len(), 6);
    let heralding: Vec<&Value> = second
        .iter()
        .copied()
        .filter(|r| r["excluded"] == false)
        .collect();
    assert_eq!(heralding.len(), 1);
    assert_eq!(heralding[0]["label"], "C_psi-psi-");
    for label in ["A", "B"] {
        let r = rows.iter().find(|r| r["label"] == label).unwrap();
        assert_eq!(r["contribution"].as_f64(), Some(0.0));
    }
    let table = stdout(&["components", "--epsilon", "0.05"]);
    assert!(table
        .lines()
        .any(|l| l.starts_with("C_psi-psi-") && l.ends_with("heralds")));
}

#[test]
fn preset_circuit_matches_run() {
    let args = [
        "circuit",
        "--circuit",
        &preset("circuit"),
        "--input",
        &preset("input-eps0.05"),
        "--detectors",
        &preset("detectors-eta1"),
        "--accept",
        "D1+D4",
        "--accept",
        "D2+D3",
        "--keep",
        "2',4'",
        "--target",
        "psi-",
    ];
    let c = json(&args);
    let r = json(&["run", "--epsilon", "0.05", "--eta", "1"]);
    let (pc, pr) = (
        c["report"]["event"]["probability"].as_f64().unwrap(),
        r["report"]["p_coincidence"].as_f64().unwrap(),
    );
    let (fc, fr) = (
        c["report"]["event"]["fidelity"].as_f64().unwrap(),
        r["report"]["fidelity"].as_f64().unwrap(),
    );
    assert!((pc - pr).abs() <= 1e-12 * pr);
    assert!((fc - fr).abs() <= 1e-12);
    let named = json(&[&["circuit", "--preset", "heralded-singlet"][..], &args[3..]].concat());
    assert_eq!(named["report"], c["report"]);
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn circuit_shows_two_photon_interference() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(
        &dir,
        "c.json",
        r#"[{"kind": "BS", "inputs": ["a", "b"], "outputs": ["c", "d"]}]"#,
    );
    let input = write(
        &dir,
        "i.json",
        r#"[{"occupation": {"a": {"H": 1}, "b": {"H": 1}}, "amplitude": [1, 0]}]"#,
    );
    let dets = write(
        &dir,
        "d.json",
        r#"[{"id": "C", "path": "c", "eta": 1.0}, {"id": "D", "path": "d", "eta": 1.0}]"#,
    );
    let v = json(&[
        "circuit",
        "--circuit",
        &circuit,
        "--input",
        &input,
        "--detectors",
        &dets,
    ]);
    let dist = &v["report"]["click_distribution"];
    assert!(dist["C+D"].as_f64().unwrap().abs() < 1e-12);
    assert!((dist["C"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn empty_circuit_single_photon_always_clicks() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(&dir, "c.json", "[]");
    let input = write(
        &dir,
        "i.json",
        r#"[{"occupation": {"a": {"V": 1}}, "amplitude": [1, 0]}]"#,
    );
    let dets = write(&dir, "d.json", r#"[{"id": "D", "path": "a", "eta": 1.0}]"#);
    let v = json(&[
        "circuit",
        "--circuit",
        &circuit,
        "--input",
        &input,
        "--detectors",
        &dets,
    ]);
    assert_eq!(v["report"]["click_distribution"]["D"].as_f64(), Some(1.0));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(
        &dir,
        "c.json",
        "[\n  {\"kind\": \"BS\", \"inputs\": [\"a\", \"b\"]}\n]",
    );
    let input = write(
        &dir,
        "i.json",
        r#"[{"occupation": {"a": {"H": 1}}, "amplitude": [1, 0]}]"#,
    );
    let dets = write(&dir, "d.json", r#"[{"id": "D", "path": "a", "eta": 1.0}]"#);
    let out = fockline(&[
        "circuit",
        "--circuit",
        &circuit,
        "--input",
        &input,
        "--detectors",
        &dets,
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("outputs") && err.contains("line 2"), "{err}");
}

#[test]
fn verify_filters_and_fails_on_tampering() {
    let out = stdout(&["verify", "--criterion", "fidelity-bound"]);
    let lines: Vec<&str> = out.lines().filter(|l| l.starts_with('[')).collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].starts_with("[PASS] 8 fidelity-bound"));

    let tampered = fockline(&["verify", "--tamper-bs", "--criterion", "physics-properties"]);
    assert_eq!(tampered.status.code(), Some(1));
    let text = String::from_utf8(tampered.stdout).unwrap();
    assert!(text.contains("FAIL HOM"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["run"][..],
        &["run", "--epsilon", "0.05", "--eta", "0"],
        &["run", "--epsilon", "0.01:0.2:5"],
        &["sweep", "--epsilon", "0.05"],
        &["sweep", "--epsilon", "0.2:0.1:3"],
        &["sweep", "--epsilon", "0.1:0.2:0"],
        &["verify", "--criterion", "no-such-thing"],
        &["bogus"],
    ] {
        assert_eq!(fockline(args).status.code(), Some(2), "{args:?}");
    }
}
