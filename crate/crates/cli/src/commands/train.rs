//! `train`: leave-one-domain-out training across all seeds and domains.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use cicf_core::data::{leave_one_domain_out, DomainDataset};
use cicf_core::model::{init_params, ModelSpec, ParamVector};
use cicf_core::trainers::{
    tasks_from_config, train_cicf, train_erm, train_maml, RunMetrics,
};
use cicf_core::Scalar;

use crate::config::ExperimentConfig;
use crate::exit::CliError;
use crate::model_file::ModelFile;
use crate::output::{prepare_out_dir, write_atomic, write_json, write_resolved_config};
use crate::Method;

struct RunOutput {
    test_domain: usize,
    seed: u64,
    metrics: RunMetrics,
    params: ParamVector,
}

#[derive(Serialize)]
struct DomainSummary {
    test_domain: usize,
    mean_accuracy: Scalar,
    std_accuracy: Scalar,
    per_seed_accuracy: Vec<Scalar>,
}

#[derive(Serialize)]
struct Summary {
    method: String,
    seeds: Vec<u64>,
    domains: Vec<DomainSummary>,
    mean_accuracy: Scalar,
}

/// Worker-slot cap: `CICF_LAB_THREADS` if set, otherwise rayon's default.
fn build_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("CICF_LAB_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => builder = builder.num_threads(n),
            _ => log::warn!("ignoring invalid CICF_LAB_THREADS={raw}"),
        }
    }
    builder.build().expect("thread pool")
}

fn run_job(
    config: &ExperimentConfig,
    data: &DomainDataset,
    spec: &ModelSpec,
    method: Method,
    test_domain: usize,
    seed: u64,
) -> Result<RunOutput, CliError> {
    let (train, test) = leave_one_domain_out(data, test_domain)?;
    let train_config = config.train_config(seed);
    let init = init_params(spec, seed)?;
    let (params, metrics) = match method {
        Method::Erm => train_erm(&train_config, &train, Some(&test), spec, &init)?,
        Method::Cicf => train_cicf(&train_config, &train, Some(&test), spec, &init)?,
        Method::Maml => {
            let tasks = tasks_from_config(&train_config, &train)?;
            train_maml(&train_config, &tasks, &train, Some(&test), spec, &init)?
        }
    };
    Ok(RunOutput { test_domain, seed, metrics, params })
}

fn write_metrics_csv(path: &Path, runs: &[RunOutput]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["test_domain", "seed", "epoch", "split", "domain", "loss", "accuracy"])
        .map_err(cicf_core::Error::from)?;
    for run in runs {
        for row in run.metrics.rows() {
            writer
                .write_record([
                    run.test_domain.to_string(),
                    run.seed.to_string(),
                    row.epoch.to_string(),
                    row.split.to_string(),
                    row.domain.clone(),
                    format!("{}", row.loss),
                    format!("{}", row.accuracy),
                ])
                .map_err(cicf_core::Error::from)?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| cicf_core::Error::Data(e.to_string()))?;
    write_atomic(path, &bytes)?;
    Ok(())
}

fn summarize(method: Method, config: &ExperimentConfig, runs: &[RunOutput]) -> Summary {
    let mut domains = Vec::new();
    let mut domain_ids: Vec<usize> = runs.iter().map(|r| r.test_domain).collect();
    domain_ids.dedup();
    for d in domain_ids {
        let accs: Vec<Scalar> = runs
            .iter()
            .filter(|r| r.test_domain == d)
            .map(|r| r.metrics.final_test_accuracy.unwrap_or(0.0))
            .collect();
        let mean = accs.iter().sum::<Scalar>() / accs.len() as Scalar;
        let std = if accs.len() > 1 {
            (accs.iter().map(|a| (a - mean) * (a - mean)).sum::<Scalar>() / (accs.len() as Scalar - 1.0))
                .sqrt()
        } else {
            0.0
        };
        domains.push(DomainSummary {
            test_domain: d,
            mean_accuracy: mean,
            std_accuracy: std,
            per_seed_accuracy: accs,
        });
    }
    let mean_accuracy = domains.iter().map(|d| d.mean_accuracy).sum::<Scalar>() / domains.len() as Scalar;
    Summary {
        method: format!("{method:?}").to_lowercase(),
        seeds: config.seeds.clone(),
        domains,
        mean_accuracy,
    }
}

pub fn run(config: &ExperimentConfig, method: Method) -> Result<(), CliError> {
    let out_dir = prepare_out_dir(config)?;
    let data = config.load_data()?;
    let spec = config.model_spec(data.feature_dim(), data.class_count())?;
    let domains = data.domains_present();
    if domains.len() < 2 {
        return Err(cicf_core::Error::config("leave-one-domain-out needs at least 2 domains").into());
    }

    let mut jobs = Vec::new();
    for &domain in &domains {
        for &seed in &config.seeds {
            jobs.push((domain, seed));
        }
    }
    let pool = build_pool();
    let results: Vec<Result<RunOutput, CliError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(domain, seed)| run_job(config, &data, &spec, method, domain, seed))
            .collect()
    });
    let mut runs = Vec::with_capacity(results.len());
    for result in results {
        runs.push(result?);
    }

    write_metrics_csv(&out_dir.join("metrics.csv"), &runs)?;
    let summary = summarize(method, config, &runs);
    write_json(&out_dir.join("summary.json"), &summary)?;
    for run in &runs {
        let file = ModelFile::new(&spec, &run.params);
        write_json(
            &out_dir.join("models").join(format!("model-d{}-s{}.json", run.test_domain, run.seed)),
            &file,
        )?;
    }
    write_resolved_config(&out_dir, config)?;
    log::info!(
        "trained {:?} on {} domains x {} seeds; mean held-out accuracy {:.4}",
        method,
        domains.len(),
        config.seeds.len(),
        summary.mean_accuracy
    );
    println!("{}", out_dir.join("summary.json").display());
    Ok(())
}
