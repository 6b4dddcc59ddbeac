//! `analyze-se`: analytic and Monte-Carlo standard errors over a batch-size
//! sweep, for the stratified and random samplers.

use serde::Serialize;

use cicf_core::clustering::{
    cluster_per_class, gradient_population_stats, per_sample_gradients, ClusterSpace,
};
use cicf_core::intervention::{allocation_rounding_bias, se_report, SeReport};
use cicf_core::model::init_params;
use cicf_core::sampling::proportional_allocation;
use cicf_core::Scalar;

use crate::config::ExperimentConfig;
use crate::exit::CliError;
use crate::output::{prepare_out_dir, write_atomic, write_json, write_resolved_config};

#[derive(Serialize)]
struct SweepEntry {
    m: usize,
    #[serde(flatten)]
    report: SeReport,
    /// Squared bias of the realized allocation's weighting (nonzero when the
    /// proportional quotas are non-integral).
    rounding_bias_sq: Scalar,
}

#[derive(Serialize)]
struct SweepReport {
    trials: u64,
    seed: u64,
    k_dagger: usize,
    population: usize,
    entries: Vec<SweepEntry>,
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
    let grads = per_sample_gradients(&params, &spec, &data)?;
    let stats = gradient_population_stats(&grads, &assignment)?;

    let mut entries = Vec::new();
    for &m in &config.analysis.batch_sizes {
        let report = se_report(&grads, &assignment, m, config.analysis.trials, seed)?;
        let allocation = proportional_allocation(assignment.sizes(), m)?;
        entries.push(SweepEntry {
            m,
            report,
            rounding_bias_sq: allocation_rounding_bias(&stats, &allocation),
        });
    }

    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["M", "se_random_exact", "se_ours_exact", "se_random_mc", "se_ours_mc"])
        .map_err(cicf_core::Error::from)?;
    for e in &entries {
        csv.write_record([
            e.m.to_string(),
            format!("{}", e.report.se_random_exact),
            format!("{}", e.report.se_ours_exact),
            format!("{}", e.report.se_random_mc.estimate),
            format!("{}", e.report.se_ours_mc.estimate),
        ])
        .map_err(cicf_core::Error::from)?;
    }
    let bytes = csv.into_inner().map_err(|e| cicf_core::Error::Data(e.to_string()))?;
    write_atomic(&out_dir.join("se_sweep.csv"), &bytes)?;

    let report = SweepReport {
        trials: config.analysis.trials,
        seed,
        k_dagger: assignment.cluster_count(),
        population: data.len(),
        entries,
    };
    write_json(&out_dir.join("se_report.json"), &report)?;
    write_resolved_config(&out_dir, config)?;
    println!("{}", out_dir.join("se_report.json").display());
    Ok(())
}
