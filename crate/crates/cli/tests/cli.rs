use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lossy_boson::{LossyNetwork, UnitaryMatrix};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lossy-boson"))
        .args(args)
        .env_remove("LOSSY_BOSON_DESK_LIMITS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn reck_build_and_paths() {
    let dir = tempfile::tempdir().unwrap();
    let net = path(dir.path(), "reck.json");
    let out = run(&["net", "build", "--geometry", "reck", "--modes", "6", "--eta", "0.98", "--out", &net]);
    assert_eq!(out.status.code(), Some(0));
    let parsed = LossyNetwork::from_json(&fs::read_to_string(&net).unwrap()).unwrap();
    assert_eq!(parsed.elements().len(), 15);

    let paths = run(&["net", "paths", "--in", &net]);
    assert_eq!(paths.status.code(), Some(0));
    let values: Vec<usize> = stdout(&paths)
        .lines()
        .map(|l| l.rsplit(' ').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, [1, 2, 3, 4, 5, 5]);
}

#[test]
fn network_files_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let first = path(dir.path(), "a.json");
    let second = path(dir.path(), "b.json");
    let built = run(&["net", "build", "--geometry", "clements", "--modes", "5", "--eta", "0.9", "--seed", "4", "--out", &first]);
    assert!(built.status.success());
    let again = run(&["net", "build", "--geometry", "file", "--in", &first, "--out", &second]);
    assert!(again.status.success());
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn extraction_output_shape() {
    let dir = tempfile::tempdir().unwrap();
    let net = path(dir.path(), "net.json");
    let ext = path(dir.path(), "ext.json");
    assert!(run(&["net", "build", "--geometry", "reck", "--modes", "3", "--eta", "0.8", "--out", &net]).status.success());
    assert!(run(&["net", "extract", "--in", &net, "--out", &ext]).status.success());
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&ext).unwrap()).unwrap();
    assert_eq!(value["exponents"], serde_json::json!([1, 2, 2]));
    assert_eq!(value["front"].as_array().unwrap().len(), 3);
    assert!(value["residual"]["elements"].is_array());
}

#[test]
fn probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let hom = path(dir.path(), "hom.json");
    fs::write(&hom, UnitaryMatrix::balanced_beam_splitter().to_json()).unwrap();
    let out = run(&["prob", "--unitary", &hom, "--input", "1,1", "--output", "1,1"]);
    assert!(out.status.success());
    let p: f64 = stdout(&out).lines().next().unwrap().split(' ').nth(1).unwrap().parse().unwrap();
    assert!(p.abs() < 1e-12);

    let id = path(dir.path(), "id.json");
    fs::write(&id, UnitaryMatrix::identity(3).to_json()).unwrap();
    let out = run(&["prob", "--unitary", &id, "--input", "2,0,1", "--output", "2,0,1"]);
    assert!(stdout(&out).starts_with("probability 1.0\n"));

    let bad = run(&["prob", "--unitary", &id, "--input", "2,0,1", "--output", "1,0,1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn seeded_samples_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let u = path(dir.path(), "u.json");
    assert!(run(&["unitary", "haar", "--modes", "4", "--seed", "9", "--out", &u]).status.success());
    let a = path(dir.path(), "a.csv");
    let b = path(dir.path(), "b.csv");
    for out in [&a, &b] {
        let r = run(&["sample", "--unitary", &u, "--input", "2,1,0,0", "--shots", "200", "--seed", "3", "--out", out]);
        assert!(r.status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next(), Some("shot_index,outcome,probability"));
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn lossy_network_sampling_emits_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let net = path(dir.path(), "reck.json");
    assert!(run(&["net", "build", "--geometry", "reck", "--modes", "6", "--eta", "0.8", "--out", &net]).status.success());
    let cert = path(dir.path(), "cert.json");
    let csv = path(dir.path(), "out.csv");
    let out = run(&[
        "sample", "--network", &net, "--input", "1,1,1,1,0,0", "--shots", "50", "--out", &csv, "--certificate", &cert,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(value["k"], 1);
    assert_eq!(value["strategy"], "single-bin");
    assert!(value["delta"].as_f64().unwrap() > 0.0);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 51);

    // A tight budget trips the short-path gate.
    let gated = run(&["sample", "--network", &net, "--input", "1,1,1,1,0,0", "--c", "10", "--kappa", "1"]);
    assert_eq!(gated.status.code(), Some(3));
    let nonstandard = run(&["sample", "--network", &net, "--input", "2,1,1,0,0,0"]);
    assert_eq!(nonstandard.status.code(), Some(3));
}

#[test]
fn validation_suites_and_exit_codes() {
    let ok = run(&["validate", "permanents"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).trim_end().ends_with("permanents: pass"));
    assert_eq!(run(&["validate", "extraction"]).status.code(), Some(0));
    assert_eq!(run(&["validate", "everything"]).status.code(), Some(2));
}

#[test]
fn malformed_files_exit_with_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let junk = path(dir.path(), "junk.json");
    fs::write(&junk, "{\"modes\": 2, \"elements\": [{\"layer\": 0}]}").unwrap();
    assert_eq!(run(&["net", "paths", "--in", &junk]).status.code(), Some(2));
    assert_eq!(run(&["net", "paths", "--in", &path(dir.path(), "missing.json")]).status.code(), Some(2));
}

#[test]
fn desk_limits_are_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let u = path(dir.path(), "u.json");
    assert!(run(&["unitary", "haar", "--modes", "10", "--out", &u]).status.success());
    let out = run(&["dist", "--unitary", &u, "--input", "1,1,0,0,0,0,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(3));
    let raised = Command::new(env!("CARGO_BIN_EXE_lossy-boson"))
        .args(["dist", "--unitary", &u, "--input", "1,1,0,0,0,0,0,0,0,0"])
        .env("LOSSY_BOSON_DESK_LIMITS", "modes=10")
        .output()
        .unwrap();
    assert_eq!(raised.status.code(), Some(0));
    let dist = lossy_boson::oracle::distribution_from_json(&String::from_utf8(raised.stdout).unwrap()).unwrap();
    assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-10);
}

#[test]
fn bench_emits_csv() {
    let out = run(&["bench", "--class", "a", "--sizes", "4,6", "--shots", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("class,n,m,"));
    assert_eq!(text.lines().count(), 3);
}
