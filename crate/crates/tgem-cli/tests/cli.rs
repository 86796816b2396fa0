//! End-to-end CLI checks: generate -> sample -> learn -> score -> distance,
//! plus a tiny benchmark/report cycle.

use std::path::Path;
use std::process::Command;

fn tgem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tgem"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("spawn tgem");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let data = dir.path().join("data.csv");
    let learned = dir.path().join("learned.json");
    let trace = dir.path().join("trace.json");

    run_ok(tgem().args([
        "generate",
        "--nodes",
        "4",
        "--density",
        "0.25",
        "--seed",
        "7",
        "--out",
        path_str(&model),
    ]));
    assert!(model.exists());

    run_ok(tgem().args([
        "sample",
        "--model",
        path_str(&model),
        "--t-end",
        "1500",
        "--seed",
        "42",
        "--out",
        path_str(&data),
    ]));
    let text = std::fs::read_to_string(&data).unwrap();
    assert!(text.starts_with("# t_star=1500"));
    assert!(text.lines().nth(1) == Some("time,label"));

    let score = run_ok(tgem().args([
        "score",
        "--model",
        path_str(&model),
        "--data",
        path_str(&data),
        "--verbose",
    ]));
    let first: serde_json::Value = serde_json::from_str(score.lines().next().unwrap()).unwrap();
    assert!(first["loglik"].is_f64() && first["bic"].is_f64() && first["penalty"].is_f64());
    assert!(first["bic"].as_f64().unwrap() <= first["loglik"].as_f64().unwrap());

    run_ok(tgem().args([
        "learn",
        "--data",
        path_str(&data),
        "--heuristic",
        "proximal",
        "--max-indegree",
        "2",
        "--max-intervals",
        "4",
        "--out",
        path_str(&learned),
        "--trace",
        path_str(&trace),
    ]));
    let trace_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert!(trace_json["entries"].is_array());

    let distance = run_ok(tgem().args([
        "distance",
        "--a",
        path_str(&model),
        "--b",
        path_str(&learned),
        "--mode",
        "refined",
    ]));
    let d: serde_json::Value = serde_json::from_str(distance.trim()).unwrap();
    assert!(d["distance"].as_f64().unwrap() >= 0.0);
    assert!(d["edges"].is_array());

    // The quantile heuristic needs --q.
    let out = tgem()
        .args([
            "learn",
            "--data",
            path_str(&data),
            "--heuristic",
            "quantile",
            "--out",
            path_str(&learned),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success(), "quantile without --q must fail");

    run_ok(tgem().args([
        "learn",
        "--data",
        path_str(&data),
        "--heuristic",
        "quantile",
        "--q",
        "0.5",
        "--out",
        path_str(&learned),
    ]));
}

#[test]
fn benchmark_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.toml");
    let results = dir.path().join("results");
    let report = dir.path().join("report");
    std::fs::write(
        &config,
        "nodes = [3]\ndensities = [0.2]\ntime_units = [300]\nreplicates = 2\n\
         heuristics = [\"proximal\", \"q=0.5\"]\n",
    )
    .unwrap();

    run_ok(tgem().args([
        "benchmark",
        "--config",
        path_str(&config),
        "--out",
        path_str(&results),
        "--jobs",
        "2",
        "--per-edge",
    ]));
    let results_csv = std::fs::read_to_string(results.join("results.csv")).unwrap();
    assert!(results_csv.starts_with("# tgem-results v1"));
    assert_eq!(results_csv.lines().count(), 2 + 4, "schema + header + 4 rows");
    assert!(results.join("timings.csv").exists());
    assert!(results.join("per_edge.csv").exists());

    run_ok(tgem().args([
        "report",
        "--results",
        path_str(&results),
        "--out",
        path_str(&report),
    ]));
    assert!(report.join("table2.csv").exists());
    assert!(report.join("table3.csv").exists());
    assert!(report.join("table4.csv").exists());
    assert!(report.join("report.txt").exists());
    assert!(report.join("distance_by_horizon.csv").exists());
}
