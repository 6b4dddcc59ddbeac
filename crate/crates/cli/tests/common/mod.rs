//! Helpers shared by the CLI integration tests.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cicf-lab")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

/// A small two-domain generator config; fast enough for every command.
pub fn tiny_config_json() -> serde_json::Value {
    serde_json::json!({
        "data": {
            "generator": {
                "class_count": 2,
                "causal_dims": 2,
                "confounder_dims": 2,
                "domains": [
                    {"confounder_correlation": 0.8, "samples_per_class": 20},
                    {"confounder_correlation": 0.0, "samples_per_class": 20}
                ],
                "causal_separation": 2.0,
                "noise_std": 0.5,
                "seed": 11
            }
        },
        "clustering": {"k": 2, "space": "raw_input"},
        "training": {
            "alpha": 0.05,
            "beta": 0.1,
            "epochs": 2,
            "global_batch": 24,
            "outer_batch": 16,
            "model": {"hidden": [4], "activation": "tanh", "split_index": 1}
        },
        "analysis": {"trials": 500, "batch_sizes": [4, 8], "iterations": 1000},
        "seeds": [0, 1]
    })
}

pub fn write_config(dir: &Path, value: &serde_json::Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

pub fn read_json(path: &Path) -> serde_json::Value {
    let raw = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&raw).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Validates an emitted document against a shipped schema.
pub fn assert_matches_schema(schema_name: &str, instance: &serde_json::Value) {
    let schema = read_json(&workspace_root().join("schemas").join(schema_name));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name} violations: {errors:?}");
}

pub fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

pub fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}
