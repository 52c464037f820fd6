use std::path::Path;
use std::process::{Command, Output};

use conelab::poly::PolyFile;
use serde_json::Value;

fn conelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conelab")).args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_quadratics_in_three_variables_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = conelab(&["verify", "--n", "3", "--deg", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["config"]["n"], 3);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_reports_top_spectrum_entry_and_names_failures() {
    let o = conelab(&["verify", "--n", "2", "--deg", "4"]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let spectrum = r["payload"]["spectrum"].as_array().unwrap();
    assert_eq!(spectrum.last().unwrap()["eigenvalue"], "1/6");
    // the gradient-ball bound of the metric comparison lemma fails at (2, 4)
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("first failing check: (Vol B_M / Vol B_G)"), "{err}");
}

#[test]
fn gauge_of_example_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.json");
    conelab::report::example_poly_file().write(&input).unwrap();
    let out = dir.path().join("g.json");
    let o = conelab(&[
        "gauge", "--n", "3", "--deg", "4", "--cone", "nonneg", "--input", input.to_str().unwrap(), "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&out)["payload"]["result"]["value"].as_f64().unwrap();
    assert!((v - 0.2).abs() < 1e-8, "{v}");
}

#[test]
fn input_errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("f.json");
    conelab::report::example_poly_file().write(&good).unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 3, \"degree\":").unwrap();
    let off_m = dir.path().join("x14.json");
    PolyFile::from_json(r#"{"n": 3, "degree": 4, "terms": [[[4, 0, 0], "1"]]}"#).unwrap().write(&off_m).unwrap();

    let run = |cone: &str, file: &Path, n: &str| {
        conelab(&["gauge", "--n", n, "--deg", "4", "--cone", cone, "--input", file.to_str().unwrap()]).status.code()
    };
    assert_eq!(run("nonneg", &bad, "3"), Some(3));
    assert_eq!(run("nonneg", &off_m, "3"), Some(3));
    assert_eq!(run("nonneg", &good, "4"), Some(5));
    assert_eq!(conelab(&["volume", "--n", "9", "--deg", "4", "--cone", "sos"]).status.code(), Some(6));
    assert_eq!(conelab(&["verify", "--n", "1"]).status.code(), Some(2));
    assert_eq!(conelab(&["verify", "--deg", "3"]).status.code(), Some(2));
    assert_eq!(conelab(&["volume", "--n", "3"]).status.code(), Some(2));
    assert_eq!(conelab(&["frobnicate"]).status.code(), Some(2));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\"command\": \"volume\", \"n\": ").unwrap();
    assert_eq!(conelab(&["volume", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn bounds_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let csv = dir.path().join("b.csv");
    let o = conelab(&["bounds", "--n", "3", "--deg", "4", "--out", out.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&out);
    assert_eq!(r["payload"]["kind"], "bounds");
    assert_eq!(r["payload"]["alpha"], "16/25");
    let c = &r["payload"]["rows"][0];
    assert!((c["lower"].as_f64().unwrap() - 0.0913).abs() < 1e-4);
    assert!((c["upper"].as_f64().unwrap() - 2.744).abs() < 1e-3);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("body,n,two_k,lower,upper"));
}

#[test]
fn volume_reports_are_byte_identical_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    let args = |out: &str| {
        vec![
            "volume".to_string(), "--n".into(), "3".into(), "--deg".into(), "4".into(), "--cone".into(),
            "nonneg".into(), "--seed".into(), "42".into(), "--samples".into(), "2000".into(), "--out".into(), p(out),
        ]
    };
    let run = |a: Vec<String>| {
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        conelab(&a).status.code()
    };
    assert_eq!(run(args("a.json")), Some(0));
    assert_eq!(run(args("b.json")), Some(0));
    let a = std::fs::read(p("a.json")).unwrap();
    assert_eq!(a, std::fs::read(p("b.json")).unwrap());
    assert_eq!(run(vec!["volume".into(), "--config".into(), p("a.json"), "--out".into(), p("c.json")]), Some(0));
    assert_eq!(a, std::fs::read(p("c.json")).unwrap());
    assert!(!String::from_utf8_lossy(&a).contains("elapsed"));
}
