//! Datasets: synthetic confounded generation, CSV ingestion, and
//! leave-one-domain-out splitting.

mod csv_io;
mod dataset;
mod split;
mod synthetic;

pub use csv_io::{load_csv, save_csv, CsvSchema};
pub use dataset::{DomainDataset, NormStats, Sample};
pub use split::leave_one_domain_out;
pub use synthetic::{generate, DomainSpecEntry, SyntheticDomainSpec};
