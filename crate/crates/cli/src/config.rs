//! Experiment configuration: strict JSON with dotted-path overrides.
//!
//! Unknown keys anywhere in the document are rejected. The fully resolved
//! configuration (after `--set`, `--seed`, `--out`) is what commands write
//! back as `resolved-config.json`; re-running from that file reproduces the
//! run byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cicf_core::clustering::ClusterSpace;
use cicf_core::data::{CsvSchema, DomainDataset, SyntheticDomainSpec};
use cicf_core::intervention::VirtualScope;
use cicf_core::model::{Activation, ModelSpec};
use cicf_core::trainers::{AllocationScheme, OuterMode, OuterSampler, TaskSource, TrainConfig};
use cicf_core::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSection,
    #[serde(default)]
    pub clustering: ClusteringSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
    pub seeds: Vec<u64>,
}

/// Exactly one of `generator` or `csv`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<SyntheticDomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_column: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusteringSection {
    /// Clusters per class (K).
    pub k: usize,
    pub space: ClusterSpace,
}

impl Default for ClusteringSection {
    fn default() -> Self {
        ClusteringSection { k: 3, space: ClusterSpace::RawInput }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub split_index: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { hidden: vec![8], activation: Activation::Tanh, split_index: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub alpha: f64,
    pub beta: f64,
    pub epochs: usize,
    pub global_batch: usize,
    pub outer_batch: usize,
    pub outer_mode: OuterMode,
    pub allocation: AllocationScheme,
    pub outer_sampler: OuterSampler,
    pub virtual_scope: VirtualScope,
    pub hvp_eps: f64,
    pub maml_tasks: TaskSource,
    pub model: ModelSection,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let base = TrainConfig::default();
        TrainingSection {
            alpha: base.alpha,
            beta: base.beta,
            epochs: base.epochs,
            global_batch: base.global_batch,
            outer_batch: base.outer_batch,
            outer_mode: base.outer_mode,
            allocation: base.allocation,
            outer_sampler: base.outer_sampler,
            virtual_scope: base.virtual_scope,
            hvp_eps: base.hvp_eps,
            maml_tasks: base.maml_tasks,
            model: ModelSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Monte-Carlo trials per standard-error estimate.
    pub trials: u64,
    /// Batch sizes for the SE sweep.
    pub batch_sizes: Vec<usize>,
    /// Paired draws for the sampler comparison.
    pub iterations: u64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection { trials: 10_000, batch_sizes: vec![4, 8, 16], iterations: 1000 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match (&self.data.generator, &self.data.csv) {
            (Some(g), None) => g.validate()?,
            (None, Some(_)) => {}
            (Some(_), Some(_)) => {
                return Err(Error::config("data: set either 'generator' or 'csv', not both"))
            }
            (None, None) => return Err(Error::config("data: one of 'generator' or 'csv' is required")),
        }
        if self.clustering.k == 0 {
            return Err(Error::config("clustering.k must be >= 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds must not be empty"));
        }
        if self.analysis.trials < 100 {
            return Err(Error::config("analysis.trials must be >= 100"));
        }
        if self.analysis.batch_sizes.is_empty() {
            return Err(Error::config("analysis.batch_sizes must not be empty"));
        }
        self.train_config(self.seeds[0]).validate()?;
        Ok(())
    }

    /// Loads the dataset this configuration describes.
    pub fn load_data(&self) -> Result<DomainDataset> {
        match (&self.data.generator, &self.data.csv) {
            (Some(g), None) => cicf_core::data::generate(g),
            (None, Some(path)) => {
                let schema = CsvSchema {
                    label_column: self.data.label_column.clone().unwrap_or_else(|| "label".to_string()),
                    domain_column: self.data.domain_column.clone().unwrap_or_else(|| "domain".to_string()),
                    feature_columns: None,
                };
                cicf_core::data::load_csv(path, &schema)
            }
            _ => Err(Error::config("data: one of 'generator' or 'csv' is required")),
        }
    }

    /// Network architecture for a dataset with the given dimensions.
    pub fn model_spec(&self, feature_dim: usize, class_count: usize) -> Result<ModelSpec> {
        let mut widths = Vec::with_capacity(self.training.model.hidden.len() + 2);
        widths.push(feature_dim);
        widths.extend_from_slice(&self.training.model.hidden);
        widths.push(class_count);
        ModelSpec::new(widths, self.training.model.activation, self.training.model.split_index)
    }

    /// Assembles the trainer configuration for one seed.
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            alpha: self.training.alpha,
            beta: self.training.beta,
            epochs: self.training.epochs,
            global_batch: self.training.global_batch,
            outer_batch: self.training.outer_batch,
            clusters_per_class: self.clustering.k,
            outer_mode: self.training.outer_mode,
            allocation: self.training.allocation,
            outer_sampler: self.training.outer_sampler,
            virtual_scope: self.training.virtual_scope,
            cluster_space: self.clustering.space,
            hvp_eps: self.training.hvp_eps,
            maml_tasks: self.training.maml_tasks,
            seed,
        }
    }
}

/// Parses `KEY=VALUE` into a dotted path and a JSON value. Values parse as
/// JSON when possible, falling back to a bare string.
fn parse_override(raw: &str) -> Result<(Vec<String>, serde_json::Value)> {
    let (path, value) = raw
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override '{raw}' is not KEY=VALUE")))?;
    if path.is_empty() {
        return Err(Error::config(format!("override '{raw}' has an empty key")));
    }
    let parsed = serde_json::from_str(value)
        .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
    Ok((path.split('.').map(str::to_string).collect(), parsed))
}

/// Applies one override to the raw JSON document, creating intermediate
/// objects as needed. Typed validation happens afterwards.
fn apply_override(doc: &mut serde_json::Value, path: &[String], value: serde_json::Value) -> Result<()> {
    let mut cursor = doc;
    for key in &path[..path.len() - 1] {
        if !cursor.is_object() {
            return Err(Error::config(format!("override path segment '{key}' is not an object")));
        }
        cursor = cursor
            .as_object_mut()
            .expect("checked is_object")
            .entry(key.clone())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    let leaf = path.last().expect("non-empty path");
    cursor
        .as_object_mut()
        .ok_or_else(|| Error::config(format!("override path '{leaf}' does not address an object")))?
        .insert(leaf.clone(), value);
    Ok(())
}

/// Loads a config file, applies `--set`/`--seed`/`--out`, and validates.
pub fn load_config(
    path: &Path,
    overrides: &[String],
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<ExperimentConfig> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut doc: serde_json::Value = serde_json::from_str(&raw)
        .map_err(|e| Error::config(format!("{}: invalid JSON: {e}", path.display())))?;
    for raw_override in overrides {
        let (path, value) = parse_override(raw_override)?;
        apply_override(&mut doc, &path, value)?;
    }
    let mut config: ExperimentConfig = serde_path_to_error::deserialize(doc)
        .map_err(|e| Error::config(format!("config key '{}': {}", e.path(), e.inner())))?;
    if let Some(seed) = seed {
        config.seeds = vec![seed];
    }
    if let Some(out) = out {
        config.output.directory = Some(out.to_path_buf());
    }
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> serde_json::Value {
        serde_json::json!({
            "data": {"generator": {
                "class_count": 2, "causal_dims": 2, "confounder_dims": 1,
                "domains": [
                    {"confounder_correlation": 0.5, "samples_per_class": 10},
                    {"confounder_correlation": 0.0, "samples_per_class": 10}
                ],
                "causal_separation": 2.0, "noise_std": 0.5, "seed": 1
            }},
            "seeds": [0, 1]
        })
    }

    fn write_tmp(value: &serde_json::Value) -> PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("cicf-cli-config-{}-{}.json", std::process::id(), rand_suffix()));
        std::fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
        p
    }

    fn rand_suffix() -> u128 {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0)
    }

    #[test]
    fn parses_minimal_config_with_defaults() {
        let path = write_tmp(&minimal_json());
        let config = load_config(&path, &[], None, None).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(config.clustering.k, 3);
        assert_eq!(config.training.epochs, 30);
        assert_eq!(config.seeds, vec![0, 1]);
    }

    #[test]
    fn rejects_unknown_keys_with_path() {
        let mut doc = minimal_json();
        doc["training"] = serde_json::json!({"alhpa": 0.1});
        let path = write_tmp(&doc);
        let err = load_config(&path, &[], None, None).unwrap_err();
        std::fs::remove_file(&path).ok();
        let msg = err.to_string();
        assert!(msg.contains("alhpa"), "message should name the key: {msg}");
    }

    #[test]
    fn dotted_overrides_apply_before_validation() {
        let path = write_tmp(&minimal_json());
        let config =
            load_config(&path, &["training.alpha=0.25".into(), "clustering.k=2".into()], None, None)
                .unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(config.training.alpha, 0.25);
        assert_eq!(config.clustering.k, 2);
    }

    #[test]
    fn seed_flag_overrides_seed_list() {
        let path = write_tmp(&minimal_json());
        let config = load_config(&path, &[], Some(7), None).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(config.seeds, vec![7]);
    }

    #[test]
    fn generator_and_csv_are_mutually_exclusive() {
        let mut doc = minimal_json();
        doc["data"]["csv"] = serde_json::json!("some.csv");
        let path = write_tmp(&doc);
        let err = load_config(&path, &[], None, None).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn resolved_round_trip_is_stable() {
        let path = write_tmp(&minimal_json());
        let config = load_config(&path, &["training.beta=0.2".into()], None, None).unwrap();
        std::fs::remove_file(&path).ok();
        let once = serde_json::to_string_pretty(&config).unwrap();
        let reparsed: ExperimentConfig = serde_json::from_str(&once).unwrap();
        let twice = serde_json::to_string_pretty(&reparsed).unwrap();
        assert_eq!(once, twice);
    }
}
