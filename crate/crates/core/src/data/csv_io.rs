//! CSV ingestion and export.
//!
//! Wire format: header `f0,f1,...,label,domain`, UTF-8, newline-delimited,
//! features printed as shortest-round-trip 64-bit decimals (so a save/load
//! round trip is bit-exact).

use std::path::Path;

use crate::data::dataset::{DomainDataset, Sample};
use crate::error::{Error, Result};

/// Column roles for ingestion. `feature_columns = None` takes every column
/// that is not the label or domain, in header order.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub label_column: String,
    pub domain_column: String,
    pub feature_columns: Option<Vec<String>>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            label_column: "label".to_string(),
            domain_column: "domain".to_string(),
            feature_columns: None,
        }
    }
}

pub fn save_csv(dataset: &DomainDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<String> = (0..dataset.feature_dim()).map(|i| format!("f{i}")).collect();
    header.push("label".to_string());
    header.push("domain".to_string());
    writer.write_record(&header)?;
    for s in dataset.samples() {
        let mut record: Vec<String> = s.features.iter().map(|v| format!("{v}")).collect();
        record.push(s.label.to_string());
        record.push(s.domain.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<DomainDataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, format!("{}: {e}", path.display())))
            }
            _ => Error::Csv(e),
        })?;

    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let label_ix = find(&schema.label_column)
        .ok_or_else(|| Error::data(format!("missing label column '{}'", schema.label_column)))?;
    let domain_ix = find(&schema.domain_column)
        .ok_or_else(|| Error::data(format!("missing domain column '{}'", schema.domain_column)))?;
    let feature_ixs: Vec<usize> = match &schema.feature_columns {
        Some(names) => names
            .iter()
            .map(|n| find(n).ok_or_else(|| Error::data(format!("missing feature column '{n}'"))))
            .collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|&i| i != label_ix && i != domain_ix).collect(),
    };
    if feature_ixs.is_empty() {
        return Err(Error::data("CSV has no feature columns"));
    }

    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |ix: usize| -> Result<&str> {
            record.get(ix).ok_or_else(|| Error::data(format!("line {line}: missing column {ix}")))
        };
        let mut features = Vec::with_capacity(feature_ixs.len());
        for &ix in &feature_ixs {
            let raw = cell(ix)?;
            if raw.is_empty() {
                return Err(Error::data(format!("line {line}: empty value in column '{}'", &headers[ix])));
            }
            let value: f64 = raw.parse().map_err(|_| {
                Error::data(format!("line {line}: non-numeric feature '{raw}' in column '{}'", &headers[ix]))
            })?;
            features.push(value);
        }
        let label: usize = cell(label_ix)?
            .parse()
            .map_err(|_| Error::data(format!("line {line}: unknown label value '{}'", cell(label_ix).unwrap_or(""))))?;
        let domain: usize = cell(domain_ix)?
            .parse()
            .map_err(|_| Error::data(format!("line {line}: unknown domain value '{}'", cell(domain_ix).unwrap_or(""))))?;
        samples.push(Sample { features, label, domain });
    }
    if samples.is_empty() {
        return Err(Error::data(format!("{}: no data rows", path.display())));
    }
    let dataset = DomainDataset::from_samples(samples)?;
    log::info!(
        "loaded {} rows x {} feature columns from {}",
        dataset.len(),
        dataset.feature_dim(),
        path.display()
    );
    Ok(dataset)
}
