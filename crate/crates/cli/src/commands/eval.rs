//! `eval`: score a saved model on the configured dataset.

use std::path::Path;

use serde::Serialize;

use cicf_core::trainers::{evaluate, evaluate_by_domain};
use cicf_core::{Error, Scalar};

use crate::config::ExperimentConfig;
use crate::exit::CliError;
use crate::model_file::ModelFile;
use crate::output::{prepare_out_dir, write_json, write_resolved_config};

#[derive(Serialize)]
struct DomainEntry {
    domain: usize,
    loss: Scalar,
    accuracy: Scalar,
}

#[derive(Serialize)]
struct EvalOutput {
    accuracy: Scalar,
    correct: usize,
    total: usize,
    confusion: Vec<Vec<usize>>,
    per_domain: Vec<DomainEntry>,
}

pub fn run(config: &ExperimentConfig, params_path: &Path) -> Result<(), CliError> {
    let out_dir = prepare_out_dir(config)?;
    let data = config.load_data()?;
    let (spec, params) = ModelFile::load(params_path)?;
    if spec.input_dim() != data.feature_dim() {
        return Err(Error::shape(format!(
            "model expects {} features, dataset has {}",
            spec.input_dim(),
            data.feature_dim()
        ))
        .into());
    }
    let report = evaluate(&params, &spec, &data)?;
    let per_domain = evaluate_by_domain(&params, &spec, &data)?
        .into_iter()
        .map(|(domain, loss, accuracy)| DomainEntry { domain, loss, accuracy })
        .collect();
    let output = EvalOutput {
        accuracy: report.accuracy,
        correct: report.correct,
        total: report.total,
        confusion: report.confusion,
        per_domain,
    };
    write_json(&out_dir.join("eval.json"), &output)?;
    write_resolved_config(&out_dir, config)?;
    println!("accuracy {:.4} ({}/{})", output.accuracy, output.correct, output.total);
    Ok(())
}
