use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ebus-hvac"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

const SWEEP: &[&str] = &[
    "sweep",
    "--synthetic",
    "winter-day",
    "--design",
    "hp",
    "--design",
    "ptc,+rh",
    "--comfort=-0.5:0.5,-1:1,-1.5:1.5",
];

#[test]
fn sweep_emits_one_row_per_design_and_box() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), SWEEP);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("pareto.csv"));
    assert_eq!(rows.len(), 6);
    assert_eq!(&rows[0][0], "hp");
    assert_eq!(&rows[5][0], "ptc,+rh");
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(summary["results"].as_array().unwrap().len(), 6);
    // 14 hourly samples for each of the six cells.
    assert_eq!(csv_rows(&dir.path().join("solutions.csv")).len(), 6 * 14);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(run(dir.path(), SWEEP).status.success());
    }
    for name in ["pareto.csv", "solutions.csv", "summary.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn validate_pairs_steady_and_dynamic_per_box() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["validate", "--synthetic", "winter-day", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("validation.csv"));
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let steady: f64 = r[2].parse().unwrap();
        let dynamic: f64 = r[3].parse().unwrap();
        assert!(steady > 0.0 && dynamic > 0.0);
        assert!((steady - dynamic).abs() <= 0.15 * dynamic);
    }
}

#[test]
fn optimize_writes_wall_times_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["optimize", "--synthetic", "summer-day", "--comfort=-1:1"];
    assert!(run(dir.path(), &args).status.success());
    let header = csv::Reader::from_path(dir.path().join("solutions.csv")).unwrap().headers().unwrap().clone();
    assert!(!header.iter().any(|h| h.starts_with("wall_time")));

    let mut timed = args.to_vec();
    timed.push("--timings");
    assert!(run(dir.path(), &timed).status.success());
    let header = csv::Reader::from_path(dir.path().join("solutions.csv")).unwrap().headers().unwrap().clone();
    assert_eq!(header.iter().next_back(), Some("wall_time[ms]"));
}

#[test]
fn errors_exit_non_zero_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"seeed": 3}"#).unwrap();
    let out = run(dir.path(), &["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(report["error"].as_str().unwrap().contains("seeed"));

    let out = run(dir.path(), &["validate", "--mission", "/nonexistent/mission.csv"]);
    assert!(!out.status.success());
}
