//! Process-level checks: exit codes, stderr diagnostics, artifact
//! layout, and reproducibility of the command-line interface.

mod common;

use std::fs;

use common::{read_json, run_in, run_ok};

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("synth"), "help lists subcommands: {text}");
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["build", "--schema", "a,b"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("--catalog"), "stderr names the flag: {text}");
}

#[test]
fn unknown_config_key_is_a_usage_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("synth.conf"), "item_count = 50\nno_such_knob = 7\n").unwrap();
    let out = run_in(dir.path(), &["synth", "--config", "synth.conf"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("no_such_knob"), "stderr names the bad key: {text}");
}

#[test]
fn config_file_overrides_command_line_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("synth.conf"), "item_count = 123\nquery_count = 20\n").unwrap();
    run_ok(
        dir.path(),
        &["synth", "--config", "synth.conf", "--item-count", "999"],
    );
    let catalog = fs::read_to_string(dir.path().join("catalog.jsonl")).unwrap();
    assert_eq!(catalog.lines().count(), 123);
}

#[test]
fn malformed_catalog_line_is_an_input_error_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("catalog.jsonl"),
        concat!(
            r#"{"item_id":"a","attributes":{"product_type":["dvd"]}}"#, "\n",
            "this is not json\n",
        ),
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &["build", "--catalog", "catalog.jsonl", "--schema", "product_type,brand,color"],
    );
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("line 2"), "stderr points at the line: {text}");
}

#[test]
fn build_counts_a_hand_written_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let mut lines = String::new();
    for i in 0..3 {
        lines.push_str(&format!(
            r#"{{"item_id":"d{i}","attributes":{{"product_type":["dvd"],"brand":["maroon 5"]}}}}"#
        ));
        lines.push('\n');
    }
    for (i, color) in ["red", "red", "blue"].iter().enumerate() {
        lines.push_str(&format!(
            r#"{{"item_id":"s{i}","attributes":{{"product_type":["shirt"],"color":["{color}"]}}}}"#
        ));
        lines.push('\n');
    }
    fs::write(dir.path().join("catalog.jsonl"), lines).unwrap();
    run_ok(
        dir.path(),
        &["build", "--catalog", "catalog.jsonl", "--schema", "product_type,brand,color"],
    );

    let kg = attriq::load_graph(&dir.path().join("graph.json")).unwrap();
    assert_eq!(kg.item_count(), 6);
    assert_eq!(kg.degree("product_type", "dvd").unwrap(), 3);
    assert_eq!(kg.degree("product_type", "shirt").unwrap(), 3);
    assert_eq!(kg.degree("color", "red").unwrap(), 2);
    assert_eq!(kg.pair_count("color", "red", "product_type").unwrap(), 2);
    assert_eq!(kg.pair_count("color", "red", "brand").unwrap(), 0);
}

#[test]
fn empty_catalog_builds_an_empty_graph() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("catalog.jsonl"), "").unwrap();
    run_ok(
        dir.path(),
        &["build", "--catalog", "catalog.jsonl", "--schema", "product_type,brand,color"],
    );
    let kg = attriq::load_graph(&dir.path().join("graph.json")).unwrap();
    assert_eq!(kg.item_count(), 0);
}

#[test]
fn bench_on_an_empty_query_file_reports_no_samples() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["synth", "--item-count", "200", "--query-count", "50"]);
    run_ok(
        dir.path(),
        &["build", "--catalog", "catalog.jsonl", "--schema", "product_type,brand,color"],
    );
    run_ok(dir.path(), &["dict", "--graph", "graph.json"]);
    run_ok(
        dir.path(),
        &["featurize", "--graph", "graph.json", "--dict", "dict.tsv", "--queries", "queries.jsonl"],
    );
    run_ok(
        dir.path(),
        &["train", "--graph", "graph.json", "--features", "features.jsonl", "--epochs", "50"],
    );
    fs::write(dir.path().join("empty.txt"), "").unwrap();
    let out = run_ok(
        dir.path(),
        &[
            "bench", "--graph", "graph.json", "--dict", "dict.tsv", "--model", "model.json",
            "--queries", "empty.txt", "--target-attr", "color",
        ],
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("no samples"), "stdout explains the outcome: {text}");
}

/// One small corpus through every stage at the process level, checking
/// the report knobs and the prediction file shape along the way.
#[test]
fn full_command_sequence_produces_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["synth", "--item-count", "500", "--query-count", "120"]);
    run_ok(
        dir.path(),
        &["build", "--catalog", "catalog.jsonl", "--schema", "product_type,brand,color"],
    );
    run_ok(dir.path(), &["dict", "--graph", "graph.json"]);
    run_ok(
        dir.path(),
        &["featurize", "--graph", "graph.json", "--dict", "dict.tsv", "--queries", "queries.jsonl"],
    );
    run_ok(
        dir.path(),
        &["train", "--graph", "graph.json", "--features", "features.jsonl", "--epochs", "400"],
    );

    // a plain-text query file for predict
    common::write_query_lines(
        &dir.path().join("queries.jsonl"),
        &dir.path().join("query_lines.txt"),
    );
    run_ok(
        dir.path(),
        &[
            "predict", "--graph", "graph.json", "--dict", "dict.tsv", "--model", "model.json",
            "--queries", "query_lines.txt", "--target-attr", "color",
        ],
    );
    let predictions = fs::read_to_string(dir.path().join("predictions.jsonl")).unwrap();
    assert_eq!(predictions.lines().count(), 120);
    for line in predictions.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(record["query"].is_string());
        assert!(record["candidates"].is_array());
        for c in record["candidates"].as_array().unwrap() {
            let score = c["score"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&score));
            assert!(c["present"].is_boolean());
        }
    }

    // an out-of-range decision threshold is a usage error
    let out = run_in(
        dir.path(),
        &[
            "predict", "--graph", "graph.json", "--dict", "dict.tsv", "--model", "model.json",
            "--queries", "query_lines.txt", "--target-attr", "color", "--threshold", "1.5",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    run_ok(
        dir.path(),
        &[
            "eval", "--graph", "graph.json", "--dict", "dict.tsv", "--catalog", "catalog.jsonl",
            "--queries", "queries.jsonl", "--judgments", "judgments.tsv", "--model", "model.json",
            "--baseline", "--target-attr", "color", "--ndcg-k", "5",
        ],
    );
    let report = read_json(&dir.path().join("eval.json"));
    assert_eq!(report["ndcg_k"], 5);
    assert_eq!(report["query_count"], 120);
    assert!(report["framework"]["mean_ndcg"].as_f64().unwrap() > 0.0);
    assert!(report["baseline"].is_object());
}

#[test]
fn eval_without_a_system_to_score_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["synth", "--item-count", "60", "--query-count", "10"]);
    run_ok(
        dir.path(),
        &["build", "--catalog", "catalog.jsonl", "--schema", "product_type,brand,color"],
    );
    run_ok(dir.path(), &["dict", "--graph", "graph.json"]);
    let out = run_in(
        dir.path(),
        &[
            "eval", "--graph", "graph.json", "--dict", "dict.tsv", "--catalog", "catalog.jsonl",
            "--queries", "queries.jsonl", "--judgments", "judgments.tsv", "--target-attr", "color",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "neither --model nor --baseline given");
}

#[test]
fn same_seed_reproduces_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("a")).unwrap();
    fs::create_dir(dir.path().join("b")).unwrap();
    for sub in ["a", "b"] {
        run_ok(
            dir.path(),
            &["synth", "--out-dir", sub, "--item-count", "300", "--query-count", "40", "--seed", "7"],
        );
    }
    for artifact in ["catalog.jsonl", "queries.jsonl", "judgments.tsv"] {
        let a = fs::read(dir.path().join("a").join(artifact)).unwrap();
        let b = fs::read(dir.path().join("b").join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} differs between identical runs");
    }
}

#[test]
fn tampered_artifact_fails_checksum_verification() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["synth", "--item-count", "80", "--query-count", "10"]);

    // corrupt one record after the manifest was written
    let path = dir.path().join("catalog.jsonl");
    let mut bytes = fs::read(&path).unwrap();
    bytes.extend_from_slice(b"\n");
    fs::write(&path, bytes).unwrap();

    let out = run_in(
        dir.path(),
        &["build", "--catalog", "catalog.jsonl", "--schema", "product_type,brand,color"],
    );
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("checksum"), "stderr explains the rejection: {text}");
}

#[test]
fn manifests_record_the_command_and_checksums() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["synth", "--item-count", "60", "--query-count", "8", "--seed", "11"]);
    let manifest = read_json(&dir.path().join("catalog.jsonl.manifest.json"));
    assert_eq!(manifest["format"], "attriq-manifest");
    assert_eq!(manifest["command"], "synth");
    assert_eq!(manifest["seed"], 11);
    let outputs = manifest["outputs"].as_object().unwrap();
    assert!(outputs.keys().any(|k| k.ends_with("catalog.jsonl")));
    for digest in outputs.values() {
        let digest = digest.as_str().unwrap();
        assert_eq!(digest.len(), 64);
        assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));
    }
}
