use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value as Json;
use surprisal_cli::{run, Command, RunConfig};

fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn iris() -> RunConfig {
    RunConfig::new(data_file("iris.csv"), data_file("iris.schema.toml"))
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_surprisal"))
}

#[test]
fn evaluate_reports_every_seed() {
    let json: Json = serde_json::from_str(&run(Command::Evaluate, &iris()).unwrap()).unwrap();
    let result = &json["result"];
    assert_eq!(result["task"], "classification");
    assert_eq!(result["rows"].as_array().unwrap().len(), 30);
    let means = result["means"].as_object().unwrap();
    assert_eq!(means.keys().collect::<Vec<_>>(), ["accuracy", "mcc", "precision", "recall"]);
}

#[test]
fn single_iteration_fit() {
    let cfg = RunConfig { iters: 1, ..iris() };
    let json: Json = serde_json::from_str(&run(Command::Fit, &cfg).unwrap()).unwrap();
    assert_eq!(json["result"]["iterations_run"], 1);
    assert_eq!(json["result"]["history"].as_array().unwrap().len(), 1);
    assert_eq!(json["result"]["features"].as_array().unwrap().len(), 5);
}

fn write_gaussian_files(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut train = String::from("a,b\n");
    for _ in 0..120 {
        writeln!(train, "{},{}", draw(), draw()).unwrap();
    }
    let mut queries = String::from("b,a,label\n");
    for _ in 0..20 {
        writeln!(queries, "{},{},normal", draw() * 0.5, draw() * 0.5).unwrap();
    }
    for i in 0..5 {
        let angle = i as f64 * 1.3;
        writeln!(queries, "{},{},anomaly", 9.0 * angle.sin(), 9.0 * angle.cos()).unwrap();
    }
    let schema = "[columns.a]\nkind = \"continuous\"\n\n[columns.b]\nkind = \"continuous\"\n";
    let paths = (dir.join("train.csv"), dir.join("schema.toml"), dir.join("queries.csv"));
    std::fs::write(&paths.0, train).unwrap();
    std::fs::write(&paths.1, schema).unwrap();
    std::fs::write(&paths.2, queries).unwrap();
    paths
}

#[test]
fn detect_end_to_end_with_truth() {
    let dir = tempfile::tempdir().unwrap();
    let (train, schema, queries) = write_gaussian_files(dir.path());
    let out = dir.path().join("detect.json");
    let status = bin()
        .arg("detect")
        .args(["--data".as_ref(), train.as_os_str(), "--schema".as_ref(), schema.as_os_str()])
        .args(["--queries".as_ref(), queries.as_os_str(), "--out".as_ref(), out.as_os_str()])
        .args(["--truth", "label", "--threshold", "0.7"])
        .status()
        .unwrap();
    assert!(status.success());
    let json: Json = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let rows = json["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 25);
    for row in &rows[20..] {
        assert_eq!(row["is_anomaly"], true);
        assert_eq!(row["truth"], true);
    }
    let f1 = json["result"]["f1"].as_f64().unwrap();
    assert!(f1 >= 0.8, "{f1}");
}

#[test]
fn explain_and_familiarity_detection() {
    let dir = tempfile::tempdir().unwrap();
    let (train, schema, queries) = write_gaussian_files(dir.path());
    let text = std::fs::read_to_string(&queries).unwrap();
    let unlabeled: String = text.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n").collect();
    let queries = dir.path().join("unlabeled.csv");
    std::fs::write(&queries, unlabeled).unwrap();
    let cfg = RunConfig { queries: Some(queries), ..RunConfig::new(&train, &schema) };
    let json: Json = serde_json::from_str(&run(Command::Explain, &cfg).unwrap()).unwrap();
    let rows = json["result"].as_array().unwrap();
    assert_eq!(rows.len(), 25);
    for row in rows {
        let pi_s = row["pi_s"].as_f64().unwrap();
        let ratio = row["expected_phi"].as_f64().unwrap() / row["phi"].as_f64().unwrap();
        assert!((pi_s - ratio).abs() <= 1e-12 * ratio);
        assert!(row["pi_f"].as_f64().unwrap() >= 0.0);
    }
    // far points are less familiar than the typical query
    let pf = |i: usize| rows[i]["pi_f"].as_f64().unwrap();
    assert!(pf(24) < pf(0));

    let cfg = RunConfig { mode: surprisal_core::anomaly::DetectionMode::Familiarity, ..cfg };
    let json: Json = serde_json::from_str(&run(Command::Detect, &cfg).unwrap()).unwrap();
    assert_eq!(json["result"]["rows"].as_array().unwrap().len(), 25);
}

#[test]
fn predict_attaches_influences_and_residual_conviction() {
    let dir = tempfile::tempdir().unwrap();
    let queries = dir.path().join("q.csv");
    std::fs::write(&queries, "sepal_length,sepal_width,petal_length,petal_width,species\n5.0,3.4,1.5,0.2,setosa\n6.7,3.0,5.2,2.3,virginica\n").unwrap();
    let no_target = dir.path().join("q2.csv");
    std::fs::write(&no_target, "petal_width,petal_length,sepal_width,sepal_length\n0.2,1.4,3.5,5.1\n").unwrap();

    let cfg = RunConfig { queries: Some(queries), ..iris() };
    let json: Json = serde_json::from_str(&run(Command::Predict, &cfg).unwrap()).unwrap();
    let rows = json["result"].as_array().unwrap();
    assert_eq!(rows[0]["value"], "setosa");
    assert_eq!(rows[1]["value"], "virginica");
    for row in rows {
        assert!(row["residual_conviction"].as_f64().unwrap() >= 0.0);
        let total: f64 = row["influences"].as_array().unwrap().iter().map(|i| i["weight"].as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    let cfg = RunConfig { queries: Some(no_target), ..iris() };
    let json: Json = serde_json::from_str(&run(Command::Predict, &cfg).unwrap()).unwrap();
    assert_eq!(json["result"][0]["value"], "setosa");
    assert!(json["result"][0]["residual_conviction"].is_null());
}

#[test]
fn csv_export_has_one_row_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let cfg = RunConfig { seeds: vec![4, 1, 7], csv: Some(csv.clone()), ..iris() };
    run(Command::Evaluate, &cfg).unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "seed,accuracy,mcc,precision,recall");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("4,") && lines[3].starts_with("7,"));
}

#[test]
fn reports_are_byte_identical() {
    let cfg = RunConfig { seeds: vec![0, 1, 2, 3], ..iris() };
    assert_eq!(run(Command::Evaluate, &cfg).unwrap(), run(Command::Evaluate, &cfg).unwrap());
    assert_eq!(run(Command::Fit, &cfg).unwrap(), run(Command::Fit, &cfg).unwrap());
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "sepal_length,sepal_width,petal_length,petal_width,species\n5.1,3.5,oops,0.2,setosa\n").unwrap();

    let code = |args: &[&std::ffi::OsStr]| bin().args(args).output().unwrap();
    let iris_csv = data_file("iris.csv");
    let schema = data_file("iris.schema.toml");

    let out = code(&["fit".as_ref(), "--data".as_ref(), bad.as_os_str(), "--schema".as_ref(), schema.as_os_str()]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("petal_length") && msg.contains("row 1"), "{msg}");

    let out = code(&["evaluate".as_ref(), "--data".as_ref(), iris_csv.as_os_str(), "--schema".as_ref(), schema.as_os_str(), "--split".as_ref(), "0".as_ref()]);
    assert_eq!(out.status.code(), Some(2));

    let out = code(&["fit".as_ref(), "--data".as_ref(), iris_csv.as_os_str(), "--schema".as_ref(), schema.as_os_str(), "--k".as_ref(), "many".as_ref()]);
    assert_eq!(out.status.code(), Some(2));

    let out = code(&["detect".as_ref(), "--data".as_ref(), iris_csv.as_os_str(), "--schema".as_ref(), schema.as_os_str()]);
    assert_eq!(out.status.code(), Some(2));
}
