use lolight3::corpus::CORPUS;
use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lolight3")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("lolight3-{}-{name}", std::process::id()))
}

#[test]
fn classify_dense_flat_heisenberg() {
    let out = run(&["classify", "corpus:case8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["table2_case"], 8);
    assert_eq!(v["group"], "R");
}

#[test]
fn missing_certificate_exits_3() {
    let out = run(&["classify", "corpus:undecided"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["missing_certificates"][0], "Lcal_over_Lambda");
    assert!(v["caveats"].as_array().unwrap().iter().any(|c| c.as_str().unwrap().contains("Lcal_over_Lambda")));
}

#[test]
fn check_parallel_on_corpus() {
    for e in CORPUS.iter() {
        let out = run(&["check-parallel", &format!("corpus:{}", e.name), "--grid", "16"]);
        assert_eq!(out.status.code(), Some(0), "{}", e.name);
        let r: f64 = json(&out)["residual"].as_f64().unwrap();
        assert!(r < 1e-9);
    }
}

#[test]
fn malformed_input_exits_2() {
    let path = temp_path("bad.json");
    std::fs::write(&path, "{\"manifold\": {\"type\": \"gamma\", \"n\": 1}, \"unknown\": 3}").unwrap();
    let out = run(&["inspect", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"].is_string());
    std::fs::remove_file(path).unwrap();
    assert_eq!(run(&["classify", "corpus:nope"]).status.code(), Some(2));
    assert_eq!(run(&["verify-map", "corpus:case4", "--map", "rho"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical() {
    let a = run(&["classify", "corpus:case5"]);
    let b = run(&["classify", "corpus:case5"]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("e+00") || text.contains("e-"));
}

#[test]
fn json_spec_file_round_trip() {
    let path = temp_path("case4.json");
    std::fs::write(&path, CORPUS.iter().find(|e| e.name == "case4").unwrap().json).unwrap();
    let out = run(&["classify", path.to_str().unwrap()]);
    std::fs::remove_file(path).unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["table2_case"], 4);
}

#[test]
fn curvature_csv_and_out_file() {
    let path = temp_path("r.csv");
    let out = run(&["curvature", "corpus:case4", "--grid", "8", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("y,z,r"));
    assert_eq!(lines.count(), 64);
}

#[test]
fn verify_and_deform_generators() {
    let out = run(&["verify-map", "corpus:case5", "--map", "psi"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
    let out = run(&["deform", "corpus:case7", "--t", "0,0.25,0.5,0.75,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["paths"].as_array().unwrap().iter().all(|p| p["passed"] == true));
    let out = run(&["deform", "corpus:case4", "--map", "chi"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn holonomy_and_normalize() {
    let out = run(&["holonomy", "corpus:case4", "--z", "-0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["normalize", "corpus:case2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["normal_form"]["family"], "diophantine");
    assert!(v["pullback_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_lolight3"))
        .args(["gauss-bonnet", "corpus:case4"])
        .env("LOLIGHT3_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_lolight3"))
        .args(["gauss-bonnet", "corpus:case4"])
        .env("LOLIGHT3_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
