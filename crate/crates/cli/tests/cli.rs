//! Behavioral tests of the command-line surface: exit codes, artifact
//! shapes, and cross-command consistency on a small fixture corpus.

mod common;

use common::{json_without_timing, pulie, pulie_ok, write_fixture};

#[test]
fn ingest_reports_fixture_counts() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "");
    let stdout = pulie_ok(dir.path(), &["ingest"]);
    assert!(stdout.contains("ingested 288 messages across 12 games"));

    let stats: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/corpus_stats.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(stats["messages"], 288);
    assert_eq!(stats["games"], 12);
    // 2 lies per 8-message dialog at the fixture's 1-in-5 cadence
    let rate = stats["deceptive_rate"].as_f64().unwrap();
    assert!(rate > 0.15 && rate < 0.30, "rate {rate}");

    let layout: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/features_layout.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(layout["dim"], 34);
    assert_eq!(layout["names"].as_array().unwrap().len(), 34);
}

#[test]
fn missing_corpus_file_exits_nonzero_with_path() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("pulie.toml"),
        "[paths]\ncorpus = \"absent.jsonl\"\n",
    )
    .unwrap();
    let out = pulie(dir.path(), &["ingest"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.jsonl"));
}

#[test]
fn malformed_corpus_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("corpus.jsonl"), "this is not json\n").unwrap();
    std::fs::write(
        dir.path().join("pulie.toml"),
        "[paths]\ncorpus = \"corpus.jsonl\"\n",
    )
    .unwrap();
    let out = pulie(dir.path(), &["ingest"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn embed_import_rejects_missing_keys() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "");
    pulie_ok(dir.path(), &["ingest"]);
    // single-row matrix covers one key only
    std::fs::write(dir.path().join("matrix.tsv"), "0:0\t0.1 0.2 0.3\n").unwrap();
    std::fs::write(
        dir.path().join("pulie.toml"),
        r#"
[paths]
corpus = "corpus.jsonl"
output_dir = "out"
[embed]
import = "matrix.tsv"
"#,
    )
    .unwrap();
    let out = pulie(dir.path(), &["embed", "--mode", "import"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("misses"), "{stderr}");
}

#[test]
fn train_requires_ingested_corpus() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "");
    let out = pulie(dir.path(), &["train"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pulie ingest"));
}

#[test]
fn eval_twice_produces_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "");
    pulie_ok(dir.path(), &["ingest"]);
    pulie_ok(dir.path(), &["embed"]);
    pulie_ok(dir.path(), &["train"]);
    pulie_ok(dir.path(), &["eval"]);
    let first = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    pulie_ok(dir.path(), &["eval"]);
    let second = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    assert_eq!(json_without_timing(&first), json_without_timing(&second));
}

#[test]
fn predict_scores_messages_into_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "");
    pulie_ok(dir.path(), &["ingest"]);
    pulie_ok(dir.path(), &["embed"]);
    pulie_ok(dir.path(), &["train"]);
    std::fs::write(
        dir.path().join("messages.txt"),
        "I promise we will support you, trust me\n",
    )
    .unwrap();
    let stdout = pulie_ok(dir.path(), &["predict", "--input", "messages.txt"]);
    let line = std::fs::read_to_string(dir.path().join("out/predictions.jsonl")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    let score = parsed["score"].as_f64().unwrap();
    assert!(score > 0.0 && score < 1.0, "score {score}");
    assert!(stdout.contains("input:0"));
}

#[test]
fn tune_threshold_emits_curve() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "");
    pulie_ok(dir.path(), &["ingest"]);
    pulie_ok(dir.path(), &["embed"]);
    pulie_ok(dir.path(), &["train"]);
    let stdout = pulie_ok(dir.path(), &["tune-threshold"]);
    assert!(stdout.contains("selected threshold"));
    let curve = std::fs::read_to_string(dir.path().join("out/pr_curve.jsonl")).unwrap();
    assert!(curve.lines().count() >= 1);
    let first: serde_json::Value = serde_json::from_str(curve.lines().next().unwrap()).unwrap();
    assert!(first["precision"].is_number() && first["recall"].is_number());
}

#[test]
fn eval_with_forced_threshold() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "");
    pulie_ok(dir.path(), &["ingest"]);
    pulie_ok(dir.path(), &["embed"]);
    pulie_ok(dir.path(), &["train"]);
    pulie_ok(dir.path(), &["eval", "--threshold", "0.5"]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["threshold"], 0.5);
    assert_eq!(report["threshold_rule"], "forced");
}

#[test]
fn report_command_rerenders_results() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "");
    pulie_ok(dir.path(), &["ingest"]);
    pulie_ok(dir.path(), &["embed"]);
    pulie_ok(dir.path(), &["train"]);
    pulie_ok(dir.path(), &["eval"]);
    let stdout = pulie_ok(dir.path(), &["report"]);
    assert!(stdout.contains("test macro F1"));

    // with no artifacts at all, report is a usage error
    let empty = tempfile::tempdir().unwrap();
    std::fs::write(empty.path().join("pulie.toml"), "").unwrap();
    let out = pulie(empty.path(), &["report"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_override_changes_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), "");
    pulie_ok(dir.path(), &["ingest"]);
    pulie_ok(dir.path(), &["embed"]);
    pulie_ok(dir.path(), &["train"]);
    let a = std::fs::read(dir.path().join("out/model.bin")).unwrap();
    pulie_ok(dir.path(), &["--seed", "99", "train"]);
    let b = std::fs::read(dir.path().join("out/model.bin")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn ablate_on_synthetic_benchmark_ranks_pu_above_bce() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("pulie.toml"),
        r#"
[paths]
output_dir = "out"
[corpus]
source = "synthetic"
[model]
embed_dim = 0
[synth]
train_size = 1000
val_size = 300
test_size = 300
[eval]
seeds = [1, 2]
"#,
    )
    .unwrap();
    let stdout = pulie_ok(dir.path(), &["ablate"]);
    assert!(stdout.contains("tfidf-logreg"));

    let rows: Vec<serde_json::Value> =
        std::fs::read_to_string(dir.path().join("out/ablation.jsonl"))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
    assert_eq!(rows.len(), 5);
    let f1_of = |model: &str| -> f64 {
        rows.iter().find(|r| r["model"] == model).unwrap()["macro_f1_mean"]
            .as_f64()
            .unwrap()
    };
    assert!(
        f1_of("pu") >= f1_of("bce"),
        "pu {} < bce {}",
        f1_of("pu"),
        f1_of("bce")
    );
    assert!(
        std::fs::metadata(dir.path().join("out/vocabulary.tsv"))
            .unwrap()
            .len()
            > 0
    );
    assert!(dir.path().join("out/ablation_table.txt").exists());
}

#[test]
fn synthetic_source_rejects_ingest_and_runs_train() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("pulie.toml"),
        r#"
[paths]
output_dir = "out"
[corpus]
source = "synthetic"
[model]
embed_dim = 0
[synth]
train_size = 300
val_size = 100
test_size = 100
[train]
epochs = 3
"#,
    )
    .unwrap();
    let out = pulie(dir.path(), &["ingest"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = pulie_ok(dir.path(), &["train"]);
    assert!(stdout.contains("577 parameters")); // 34*16 + 16 + 16 + 1
}
