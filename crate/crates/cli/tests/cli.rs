//! CLI contract tests: exit codes, file outputs, schema conformance.

mod common;

use common::*;

#[test]
fn missing_config_file_exits_3_with_path() {
    let out = run(&["cluster", "--config", "/nonexistent/missing.json"]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr_of(&out).contains("missing.json"), "stderr: {}", stderr_of(&out));
}

#[test]
fn unknown_config_key_exits_1_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc = tiny_config_json();
    doc["training"]["learning_rate"] = serde_json::json!(0.1);
    let config = write_config(tmp.path(), &doc);
    let out = run(&["cluster", "--config", config.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("learning_rate"), "stderr: {}", stderr_of(&out));
}

#[test]
fn missing_output_directory_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &tiny_config_json());
    let out = run(&["cluster", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("output"), "stderr: {}", stderr_of(&out));
}

#[test]
fn divergent_training_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc = tiny_config_json();
    doc["training"]["beta"] = serde_json::json!(1e150);
    doc["training"]["model"]["activation"] = serde_json::json!("relu");
    doc["seeds"] = serde_json::json!([0]);
    let config = write_config(tmp.path(), &doc);
    let out = run(&[
        "train",
        "--method",
        "erm",
        "--config",
        config.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("divergence"), "stderr: {}", stderr_of(&out));
}

#[test]
fn cluster_writes_assignment_and_coherence() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &tiny_config_json());
    let out_dir = tmp.path().join("out");
    let out = run(&["cluster", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let csv = std::fs::read_to_string(out_dir.join("assignment.csv")).unwrap();
    assert!(csv.starts_with("sample_id,class_id,cluster_id"));
    assert_eq!(csv.lines().count(), 81, "header plus one row per sample");

    let coherence = read_json(&out_dir.join("coherence.json"));
    assert_matches_schema("coherence.schema.json", &coherence);
    assert_eq!(coherence["k_dagger"], 4);
    let resolved = read_json(&out_dir.join("resolved-config.json"));
    assert_matches_schema("experiment-config.schema.json", &resolved);
}

#[test]
fn cluster_clamps_oversized_k() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc = tiny_config_json();
    doc["clustering"]["k"] = serde_json::json!(999);
    let config = write_config(tmp.path(), &doc);
    let out_dir = tmp.path().join("out");
    let out = run(&["cluster", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    // 2 classes x 40 samples each: K clamps to the class size.
    let coherence = read_json(&out_dir.join("coherence.json"));
    assert_eq!(coherence["k_dagger"], 80);
}

#[test]
fn pacs_like_preset_produces_21_clusters() {
    let tmp = tempfile::tempdir().unwrap();
    let preset = workspace_root().join("presets/pacs-like.json");
    let out_dir = tmp.path().join("out");
    let out = run(&["cluster", "--config", preset.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let coherence = read_json(&out_dir.join("coherence.json"));
    assert_eq!(coherence["k_dagger"], 21);
    let csv = std::fs::read_to_string(out_dir.join("assignment.csv")).unwrap();
    let mut clusters: Vec<&str> =
        csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    clusters.sort_unstable();
    clusters.dedup();
    assert_eq!(clusters.len(), 21);
}

#[test]
fn train_writes_metrics_summary_and_models() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &tiny_config_json());
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "train",
        "--method",
        "cicf",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let summary = read_json(&out_dir.join("summary.json"));
    assert_matches_schema("summary.schema.json", &summary);
    assert_eq!(summary["method"], "cicf");
    assert_eq!(summary["domains"].as_array().unwrap().len(), 2);
    assert_eq!(summary["domains"][0]["per_seed_accuracy"].as_array().unwrap().len(), 2);

    let metrics = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("test_domain,seed,epoch,split,domain,loss,accuracy"));
    // 2 domains x 2 seeds x 2 epochs x (1 train row + 1 test-domain row)
    assert_eq!(metrics.lines().count(), 1 + 2 * 2 * 2 * 2);

    for domain in 0..2 {
        for seed in 0..2 {
            let model = read_json(&out_dir.join(format!("models/model-d{domain}-s{seed}.json")));
            assert_matches_schema("model-file.schema.json", &model);
        }
    }
}

#[test]
fn alpha_zero_cicf_matches_erm_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc = tiny_config_json();
    // Matched batching: uniform outer sampler (the default) on both sides.
    doc["training"]["alpha"] = serde_json::json!(0.0);
    let config = write_config(tmp.path(), &doc);
    let cicf_dir = tmp.path().join("cicf");
    let erm_dir = tmp.path().join("erm");
    let a = run(&["train", "--method", "cicf", "--config", config.to_str().unwrap(), "--out", cicf_dir.to_str().unwrap()]);
    let b = run(&["train", "--method", "erm", "--config", config.to_str().unwrap(), "--out", erm_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(exit_code(&b), 0);
    let cicf = read_json(&cicf_dir.join("summary.json"));
    let erm = read_json(&erm_dir.join("summary.json"));
    assert_eq!(cicf["domains"], erm["domains"]);
    assert_eq!(cicf["mean_accuracy"], erm["mean_accuracy"]);
    // And the metric streams coincide byte for byte.
    let cicf_csv = std::fs::read(cicf_dir.join("metrics.csv")).unwrap();
    let erm_csv = std::fs::read(erm_dir.join("metrics.csv")).unwrap();
    assert_eq!(cicf_csv, erm_csv);
}

#[test]
fn analyze_se_writes_report_and_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &tiny_config_json());
    let out_dir = tmp.path().join("out");
    let out = run(&["analyze-se", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let report = read_json(&out_dir.join("se_report.json"));
    assert_matches_schema("se-report.schema.json", &report);
    assert_eq!(report["entries"].as_array().unwrap().len(), 2);
    let sweep = std::fs::read_to_string(out_dir.join("se_sweep.csv")).unwrap();
    assert!(sweep.starts_with("M,se_random_exact,se_ours_exact,se_random_mc,se_ours_mc"));
    assert_eq!(sweep.lines().count(), 3);
}

#[test]
fn analyze_se_single_cluster_degenerates() {
    let tmp = tempfile::tempdir().unwrap();
    // One label everywhere and k = 1: exactly one cluster.
    let csv_path = tmp.path().join("flat.csv");
    let mut rows = String::from("f0,f1,label,domain\n");
    for i in 0..40 {
        rows.push_str(&format!("{}.5,{}.25,0,{}\n", i, 40 - i, i % 2));
    }
    std::fs::write(&csv_path, rows).unwrap();
    let doc = serde_json::json!({
        "data": {"csv": csv_path.to_str().unwrap()},
        "clustering": {"k": 1},
        "analysis": {"trials": 2000, "batch_sizes": [5], "iterations": 1000},
        "seeds": [3]
    });
    let config = write_config(tmp.path(), &doc);
    let out_dir = tmp.path().join("out");
    let out = run(&["analyze-se", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let report = read_json(&out_dir.join("se_report.json"));
    assert_eq!(report["k_dagger"], 1);
    let entry = &report["entries"][0];
    assert_eq!(entry["se_ours_exact"], entry["se_random_exact"]);
    let gap = (entry["se_ours_mc"]["estimate"].as_f64().unwrap()
        - entry["se_random_mc"]["estimate"].as_f64().unwrap())
    .abs();
    let band = entry["se_ours_mc"]["half_width"].as_f64().unwrap()
        + entry["se_random_mc"]["half_width"].as_f64().unwrap();
    assert!(gap <= band, "gap {gap} above band {band}");
}

#[test]
fn compare_samplers_reports_both_pairs() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &tiny_config_json());
    let out_dir = tmp.path().join("out");
    let out = run(&["compare-samplers", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let report = read_json(&out_dir.join("sampler_comparison.json"));
    assert_matches_schema("sampler-comparison.schema.json", &report);
    assert_eq!(report["m"], 24);
    assert_eq!(report["k_dagger"], 4);
    // Unbalanced clusters: the mean difference is positive with its CI
    // excluding zero.
    let pair = &report["stratified_vs_random"];
    let mean = pair["mean_e"].as_f64().unwrap();
    let ci = pair["ci95_half_width"].as_f64().unwrap();
    assert!(mean - ci > 0.0, "mean {mean} ci {ci}");
}

#[test]
fn compare_samplers_balanced_design_is_unbiased_per_cluster() {
    let tmp = tempfile::tempdir().unwrap();
    // Four equal blobs, one per (class, side) pair: balanced clusters.
    let csv_path = tmp.path().join("balanced.csv");
    let mut rows = String::from("f0,label,domain\n");
    for i in 0..25 {
        for (offset, label) in [(0.0, 0), (10.0, 0), (20.0, 1), (30.0, 1)] {
            rows.push_str(&format!("{},{},0\n", offset + (i as f64) * 0.01, label));
        }
    }
    std::fs::write(&csv_path, rows).unwrap();
    let doc = serde_json::json!({
        "data": {"csv": csv_path.to_str().unwrap()},
        "clustering": {"k": 2},
        "training": {"global_batch": 20},
        "analysis": {"iterations": 4000},
        "seeds": [0]
    });
    let config = write_config(tmp.path(), &doc);
    let out_dir = tmp.path().join("out");
    let out = run(&["compare-samplers", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let report = read_json(&out_dir.join("sampler_comparison.json"));
    // Class-weighted draws match the stratified histogram on average.
    let ratio = report["stratified_vs_class_weighted"]["ratio_of_mean_histogram"].as_f64().unwrap();
    assert!(ratio < 0.03, "mean-histogram ratio {ratio} not near zero");
}

#[test]
fn compare_samplers_rejects_small_iteration_count() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc = tiny_config_json();
    doc["analysis"]["iterations"] = serde_json::json!(10);
    let config = write_config(tmp.path(), &doc);
    let out = run(&["compare-samplers", "--config", config.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn eval_scores_a_saved_model() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &tiny_config_json());
    let train_dir = tmp.path().join("train");
    let out = run(&["train", "--method", "erm", "--config", config.to_str().unwrap(), "--out", train_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let eval_dir = tmp.path().join("eval");
    let params = train_dir.join("models/model-d0-s0.json");
    let out = run(&[
        "eval",
        "--params",
        params.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--out",
        eval_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let report = read_json(&eval_dir.join("eval.json"));
    assert_matches_schema("eval.schema.json", &report);
    let confusion_total: u64 = report["confusion"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap())
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(confusion_total, report["total"].as_u64().unwrap());
}

#[test]
fn shipped_presets_validate_against_the_config_schema() {
    for preset in ["confounded3.json", "pacs-like.json"] {
        let doc = read_json(&workspace_root().join("presets").join(preset));
        assert_matches_schema("experiment-config.schema.json", &doc);
    }
}

#[test]
fn thread_cap_env_var_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &tiny_config_json());
    let out_dir = tmp.path().join("out");
    let out = std::process::Command::new(bin())
        .args(["train", "--method", "erm", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .env("CICF_LAB_THREADS", "1")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(out_dir.join("summary.json").exists());
}
