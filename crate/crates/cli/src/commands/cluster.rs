//! `cluster`: per-class k-means plus gradient-coherence diagnostics.

use serde::Serialize;

use cicf_core::clustering::{cluster_per_class, gradient_coherence, ClusterSpace};
use cicf_core::model::init_params;
use cicf_core::Scalar;

use crate::config::ExperimentConfig;
use crate::exit::CliError;
use crate::output::{prepare_out_dir, write_atomic, write_json, write_resolved_config};

#[derive(Serialize)]
struct CoherenceReport {
    k_dagger: usize,
    sizes: Vec<usize>,
    class_of_cluster: Vec<usize>,
    coherence: Vec<Scalar>,
    mean_coherence: Scalar,
    seed: u64,
}

pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let out_dir = prepare_out_dir(config)?;
    let data = config.load_data()?;
    let seed = config.seeds[0];
    let spec = config.model_spec(data.feature_dim(), data.class_count())?;
    let params = init_params(&spec, seed)?;

    let encoder = match config.clustering.space {
        ClusterSpace::RawInput => None,
        ClusterSpace::EncoderOutput => Some((&params, &spec)),
    };
    let assignment = cluster_per_class(&data, config.clustering.k, config.clustering.space, encoder, seed)?;

    let mut csv_bytes = Vec::new();
    assignment.write_csv(&data, &mut csv_bytes)?;
    write_atomic(&out_dir.join("assignment.csv"), &csv_bytes)?;

    let coherence = gradient_coherence(&params, &spec, &data, &assignment)?;
    let mean_coherence = coherence.iter().sum::<Scalar>() / coherence.len() as Scalar;
    let report = CoherenceReport {
        k_dagger: assignment.cluster_count(),
        sizes: assignment.sizes().to_vec(),
        class_of_cluster: assignment.class_of_cluster().to_vec(),
        coherence,
        mean_coherence,
        seed,
    };
    write_json(&out_dir.join("coherence.json"), &report)?;
    write_resolved_config(&out_dir, config)?;
    log::info!("clustered into {} clusters, mean coherence {mean_coherence:.4}", report.k_dagger);
    println!("{}", out_dir.join("assignment.csv").display());
    Ok(())
}
