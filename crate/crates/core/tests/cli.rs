use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use sbmlab::threshold::witness_region;
use sbmlab::LabeledGraph;

fn sbmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbmlab")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = sbmlab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn sample_graph(dir: &Path) -> String {
    let path = dir.join("g.txt");
    let p = path.to_str().unwrap().to_string();
    ok(&["sample", "--n", "40", "--alpha1", "8", "--alpha2", "5", "--beta", "2", "--seed", "3", "--out", &p]);
    p
}

#[test]
fn sample_then_swap_test() {
    let dir = tempfile::tempdir().unwrap();
    let g = sample_graph(dir.path());
    let graph = LabeledGraph::read_text(std::fs::read(&g).unwrap().as_slice()).unwrap();
    assert_eq!(graph.n(), 40);
    let stdout = ok(&["swap-test", "--graph", &g]);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    let best = sbmlab::best_swap(&graph, graph.truth()).unwrap();
    assert_eq!(v["best_delta"], best.delta);
    assert_eq!(v["improving_swap"], best.delta > 0);
    // Same seed, same bytes.
    let again = dir.path().join("h.txt");
    ok(&["--seed", "3", "sample", "--n", "40", "--alpha1", "8", "--alpha2", "5", "--beta", "2", "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&g).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn threshold_reports_witness() {
    let v: Value = serde_json::from_str(&ok(&["threshold", "--alpha1", "26.3", "--alpha2", "12.5", "--beta", "10"])).unwrap();
    assert!(v["it"].as_f64().unwrap() > 1.0);
    assert!(v["witness"]["gap"].as_f64().unwrap() > 0.0);
    let v: Value = serde_json::from_str(&ok(&["threshold", "--alpha1", "25", "--alpha2", "25", "--beta", "4"])).unwrap();
    assert!(v["witness"].is_null());
}

#[test]
fn sdp_and_certificate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = sample_graph(dir.path());
    let d = dir.path().to_str().unwrap();
    ok(&["--out-dir", d, "sdp-solve", "--problem", "sym", "--graph", &g, "--include-matrix", "--out", "sol.json"]);
    let v = json(&dir.path().join("sol.json"));
    assert_eq!(v["status"], "Converged");
    assert_eq!(v["matrix"].as_array().unwrap().len(), 40);
    ok(&["--out-dir", d, "sdp-solve", "--problem", "asym", "--graph", &g, "--alpha1", "8", "--alpha2", "5", "--beta", "2", "--out", "asym.json"]);
    assert!(json(&dir.path().join("asym.json"))["matrix"].is_null());

    ok(&["--out-dir", d, "certificate", "--graph", &g, "--alpha1", "8", "--alpha2", "5", "--beta", "2", "--out", "cert.json"]);
    let v = json(&dir.path().join("cert.json"));
    assert_eq!(v["reports"].as_array().unwrap().len(), 41);
    ok(&["--out-dir", d, "certificate", "--graph", &g, "--alpha1", "8", "--alpha2", "5", "--beta", "2", "--lambda-grid", "-0.5,0,0.5", "--out", "c3.json"]);
    assert_eq!(json(&dir.path().join("c3.json"))["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g = sample_graph(dir.path());
    assert_eq!(sbmlab(&["threshold", "--alpha1", "-1", "--alpha2", "2", "--beta", "1"]).status.code(), Some(2));
    assert_eq!(sbmlab(&["sample", "--n", "10"]).status.code(), Some(2));
    assert_eq!(sbmlab(&["bogus"]).status.code(), Some(2));
    assert_eq!(sbmlab(&["swap-test", "--graph", "/nonexistent/g.txt"]).status.code(), Some(4));
    let out = sbmlab(&["sdp-solve", "--graph", &g, "--max-iter", "3"]);
    assert_eq!(out.status.code(), Some(3));
    // The partial solve is still reported.
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "IterLimit");
}

#[test]
fn experiment_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("swap.cfg");
    std::fs::write(
        &cfg,
        "# swap frequency\nkind = swap-failure\nn = 300\nalpha1 = 26.3\nalpha2 = 12.5\nbeta = 10\ntrials = 6\nseed = 5\n",
    )
    .unwrap();
    let out = dir.path().join("run");
    let args = ["--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "experiment"];
    ok(&args);
    let first = std::fs::read(out.join("swap-failure.json")).unwrap();
    ok(&args);
    assert_eq!(first, std::fs::read(out.join("swap-failure.json")).unwrap());
    let m = json(&out.join("swap-failure.manifest.json"));
    assert_eq!(m["experiment"], "swap-failure");
    let r: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(r["records"].as_array().unwrap().len(), 6);
    assert_eq!(r["records"][2]["seed"], 7);
    // Flags override the file.
    ok(&["--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "experiment", "--trials", "2"]);
    assert_eq!(json(&out.join("swap-failure.json"))["records"].as_array().unwrap().len(), 2);
}

#[test]
fn figure_data_and_region() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&["--out-dir", d, "figure-data", "--fig", "2", "--points", "90"]);
    for f in ["fig2_cloud1.csv", "fig2_cloud2.csv", "fig2_separator.csv", "fig2_points.csv", "fig2_witness.csv", "fig2_manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let region = dir.path().join("region.csv");
    ok(&["witness-region", "--beta", "10", "--resolution", "8,6", "--out", region.to_str().unwrap()]);
    let mut expect = Vec::new();
    witness_region(10.0, (10.0, 40.0), (10.0, 40.0), (8, 6)).unwrap().write_csv(&mut expect).unwrap();
    assert_eq!(std::fs::read(&region).unwrap(), expect);

    let cloud = ok(&["cloud", "--community", "1", "--alpha1", "26.3", "--alpha2", "12.5", "--beta", "10", "--points", "12"]);
    assert_eq!(cloud.lines().count(), 13);
    assert_eq!(cloud.lines().next(), Some("x,y,exponent"));
}
