//! `compare-samplers`: paired batch draws measuring the per-cluster
//! histogram difference E between the stratified sampler and its rivals.

use serde::Serialize;

use cicf_core::clustering::{cluster_per_class, ClusterSpace};
use cicf_core::model::init_params;
use cicf_core::rng;
use cicf_core::sampling::{draw, proportional_allocation, sampler_difference_e, SamplerKind};
use cicf_core::Scalar;

use crate::config::ExperimentConfig;
use crate::exit::CliError;
use crate::output::{prepare_out_dir, write_json, write_resolved_config};

#[derive(Serialize)]
struct PairReport {
    mean_e: Scalar,
    mean_ratio: Scalar,
    ci95_half_width: Scalar,
    /// E computed on the iteration-averaged rival histogram; near zero when
    /// the rival is per-cluster unbiased (balanced designs).
    e_of_mean_histogram: Scalar,
    ratio_of_mean_histogram: Scalar,
}

#[derive(Serialize)]
struct CompareReport {
    m: usize,
    k_dagger: usize,
    iterations: u64,
    seed: u64,
    stratified_vs_random: PairReport,
    stratified_vs_class_weighted: PairReport,
}

fn pair_report(es: &[Scalar], m: usize, reference: &[usize], mean_hist: &[Scalar]) -> PairReport {
    let n = es.len() as Scalar;
    let mean_e = es.iter().sum::<Scalar>() / n;
    let sd = (es.iter().map(|e| (e - mean_e) * (e - mean_e)).sum::<Scalar>() / (n - 1.0)).sqrt();
    let ci = 1.96 * sd / n.sqrt();
    let e_of_mean: Scalar =
        reference.iter().zip(mean_hist).map(|(&a, &b)| (a as Scalar - b).abs()).sum();
    PairReport {
        mean_e,
        mean_ratio: mean_e / m as Scalar,
        ci95_half_width: ci,
        e_of_mean_histogram: e_of_mean,
        ratio_of_mean_histogram: e_of_mean / m as Scalar,
    }
}

pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    if config.analysis.iterations < 1000 {
        return Err(cicf_core::Error::config("analysis.iterations must be >= 1000 for compare-samplers").into());
    }
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
    let m = config.training.global_batch.min(data.len());
    let allocation = proportional_allocation(assignment.sizes(), m)?;

    let mut stratified_rng = rng::stream(seed, "compare-stratified", 0);
    let mut random_rng = rng::stream(seed, "compare-random", 0);
    let mut class_rng = rng::stream(seed, "compare-class-weighted", 0);

    let iterations = config.analysis.iterations;
    let k_total = assignment.cluster_count();
    let mut e_random = Vec::with_capacity(iterations as usize);
    let mut e_class = Vec::with_capacity(iterations as usize);
    let mut sum_random = vec![0.0; k_total];
    let mut sum_class = vec![0.0; k_total];
    // Under proportional allocation the stratified histogram is fixed.
    let reference = allocation.counts().to_vec();
    for _ in 0..iterations {
        let stratified = draw(
            &data,
            Some(&assignment),
            SamplerKind::StratifiedProportional,
            Some(&allocation),
            m,
            &mut stratified_rng,
        )?;
        let random = draw(&data, None, SamplerKind::Random, None, m, &mut random_rng)?;
        let class_weighted =
            draw(&data, None, SamplerKind::ClassWeightedRandom, None, m, &mut class_rng)?;
        let hist_s = assignment.histogram(&stratified.indices);
        let hist_r = assignment.histogram(&random.indices);
        let hist_c = assignment.histogram(&class_weighted.indices);
        debug_assert_eq!(hist_s, reference);
        e_random.push(sampler_difference_e(&hist_s, &hist_r)?.e as Scalar);
        e_class.push(sampler_difference_e(&hist_s, &hist_c)?.e as Scalar);
        for (s, &h) in sum_random.iter_mut().zip(&hist_r) {
            *s += h as Scalar;
        }
        for (s, &h) in sum_class.iter_mut().zip(&hist_c) {
            *s += h as Scalar;
        }
    }
    let mean_random: Vec<Scalar> = sum_random.iter().map(|s| s / iterations as Scalar).collect();
    let mean_class: Vec<Scalar> = sum_class.iter().map(|s| s / iterations as Scalar).collect();

    let report = CompareReport {
        m,
        k_dagger: k_total,
        iterations,
        seed,
        stratified_vs_random: pair_report(&e_random, m, &reference, &mean_random),
        stratified_vs_class_weighted: pair_report(&e_class, m, &reference, &mean_class),
    };
    write_json(&out_dir.join("sampler_comparison.json"), &report)?;
    write_resolved_config(&out_dir, config)?;
    log::info!(
        "M={m}, K_dagger={k_total}: mean E vs random {:.2} ({:.1}%), vs class-weighted {:.2} ({:.1}%)",
        report.stratified_vs_random.mean_e,
        100.0 * report.stratified_vs_random.mean_ratio,
        report.stratified_vs_class_weighted.mean_e,
        100.0 * report.stratified_vs_class_weighted.mean_ratio
    );
    println!("{}", out_dir.join("sampler_comparison.json").display());
    Ok(())
}
