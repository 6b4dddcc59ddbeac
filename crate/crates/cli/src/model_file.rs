//! Trained-model file format: architecture plus the flat parameter vector.

use std::path::Path;

use serde::{Deserialize, Serialize};

use cicf_core::model::{Activation, ModelSpec, ParamVector};
use cicf_core::{Error, Result, Scalar};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    pub split_index: usize,
    pub values: Vec<Scalar>,
}

impl ModelFile {
    pub fn new(spec: &ModelSpec, params: &ParamVector) -> Self {
        ModelFile {
            layer_widths: spec.layer_widths.clone(),
            activation: spec.activation,
            split_index: spec.split_index,
            values: params.values().to_vec(),
        }
    }

    pub fn load(path: &Path) -> Result<(ModelSpec, ParamVector)> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        let file: ModelFile = serde_json::from_str(&raw)?;
        let spec = ModelSpec::new(file.layer_widths, file.activation, file.split_index)?;
        let params = ParamVector::from_values(spec.manifest(), file.values)?;
        Ok((spec, params))
    }
}
