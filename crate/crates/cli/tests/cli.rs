use std::path::Path;
use std::process::{Command, Output};

fn hgcpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgcpd")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = hgcpd(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    ok(&["generate", "--out-dir", s(&a), "--datasets", "2", "--seed", "3"]);
    ok(&["generate", "--out-dir", s(&b), "--datasets", "2", "--seed", "3"]);
    ok(&["generate", "--out-dir", s(&c), "--datasets", "2", "--seed", "4"]);
    for name in ["dataset_000.jsonl", "dataset_001.jsonl", "dataset_000.truth.json", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert_ne!(
        std::fs::read(a.join("dataset_000.jsonl")).unwrap(),
        std::fs::read(c.join("dataset_000.jsonl")).unwrap()
    );
    // datasets of one run differ from each other
    assert_ne!(
        std::fs::read(a.join("dataset_000.jsonl")).unwrap(),
        std::fs::read(a.join("dataset_001.jsonl")).unwrap()
    );
    let truth: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("dataset_000.truth.json")).unwrap()).unwrap();
    assert_eq!(truth["changes"], serde_json::json!([30, 60, 90, 120]));
}

#[test]
fn errors_are_json_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.jsonl");
    let out = hgcpd(&["detect", "--input", s(&missing), "--output", s(&dir.path().join("x.csv"))]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string());
    assert!(err["causes"].is_array());

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"t\": 0, \"nodes\": [\"a\"]}\n").unwrap();
    let out = hgcpd(&["detect", "--input", s(&bad), "--output", s(&dir.path().join("x.csv"))]);
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("line 1"), "{text}");

    let out = hgcpd(&["--set", "bogus=1", "generate", "--out-dir", s(dir.path())]);
    assert!(!out.status.success());
}

#[test]
fn single_dataset_table_matches_per_dataset_scores() {
    let dir = tempfile::tempdir().unwrap();
    let (data, runs) = (dir.path().join("data"), dir.path().join("runs"));
    let per = dir.path().join("per.csv");
    ok(&["generate", "--out-dir", s(&data), "--datasets", "1", "--seed", "11"]);
    ok(&["detect", "--method", "all", "--data-dir", s(&data), "--runs-dir", s(&runs)]);
    ok(&["eval", "--data-dir", s(&data), "--runs-dir", s(&runs), "--per-dataset", s(&per)]);

    let mut table = csv::Reader::from_path(runs.join("table.csv")).unwrap();
    let headers = table.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = table.records().map(Result::unwrap).collect();
    let methods: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(methods, ["cb-gadget", "star", "clique"]);

    let mut per_reader = csv::Reader::from_path(&per).unwrap();
    let per_headers = per_reader.headers().unwrap().clone();
    let per_rows: Vec<csv::StringRecord> = per_reader.records().map(Result::unwrap).collect();
    assert_eq!(per_rows.len(), 3);
    for row in &rows {
        let other = per_rows.iter().find(|r| r[0] == row[0]).unwrap();
        for metric in ["f1_at_3pct", "avg_f1", "timing_error"] {
            let a: f64 = row[headers.iter().position(|h| h == metric).unwrap()].parse().unwrap();
            let b: f64 = other[per_headers.iter().position(|h| h == metric).unwrap()].parse().unwrap();
            assert!((a - b).abs() < 1e-6, "{} {metric}: {a} vs {b}", &row[0]);
        }
    }

    let scores = std::fs::read_to_string(runs.join("cb-gadget/dataset_000.csv")).unwrap();
    let mut lines = scores.lines();
    assert_eq!(lines.next(), Some("t,Z,Z_hat,is_predicted_change"));
    let flagged = lines.filter(|l| l.ends_with(",1")).count();
    // ceil(0.03 · 150)
    assert_eq!(flagged, 5);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, format!("# small run\ndatasets = 1\nsnapshots = 140\ndata_dir = {}\n", s(&data))).unwrap();
    ok(&["--config", s(&cfg), "generate"]);
    let jsonl = std::fs::read_to_string(data.join("dataset_000.jsonl")).unwrap();
    let last: serde_json::Value = serde_json::from_str(jsonl.lines().last().unwrap()).unwrap();
    assert_eq!(last["t"], 139);
    assert!(!data.join("dataset_001.jsonl").exists());

    let out = dir.path().join("s.csv");
    let input = data.join("dataset_000.jsonl");
    ok(&["--config", s(&cfg), "--set", "count=2", "detect", "--method", "clique", "--input", s(&input), "--output", s(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(",1")).count(), 2);
}

#[test]
fn spectrum_dump_has_k_columns() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["generate", "--out-dir", s(&data), "--datasets", "1", "--snapshots", "140"]);
    let out = dir.path().join("spec.csv");
    ok(&["spectrum", "--method", "star", "--k", "5", "--input", s(&data.join("dataset_000.jsonl")), "--output", s(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,lambda_1,lambda_2,lambda_3,lambda_4,lambda_5"));
    assert_eq!(lines.count(), 140);
}
