//! Shipped experiment presets.
//!
//! `confounded3` is the domain-generalization benchmark: two training
//! domains whose confounder channel agrees with the label 95% of the time,
//! and a held-out domain where it is pure noise. `pacs_like` mirrors the
//! scale of a 7-class, 4-domain image benchmark (21 clusters, batch 256).

use crate::data::{DomainSpecEntry, SyntheticDomainSpec};
use crate::model::{Activation, ModelSpec};
use crate::trainers::TrainConfig;

/// Domain id held out for testing in `confounded3` (the only one with
/// zero confounder correlation).
pub const CONFOUNDED3_TEST_DOMAIN: usize = 2;

pub fn confounded3_data() -> SyntheticDomainSpec {
    SyntheticDomainSpec {
        class_count: 2,
        causal_dims: 2,
        confounder_dims: 2,
        domains: vec![
            DomainSpecEntry { confounder_correlation: 0.9, samples_per_class: 200 },
            DomainSpecEntry { confounder_correlation: 0.9, samples_per_class: 200 },
            DomainSpecEntry { confounder_correlation: 0.0, samples_per_class: 200 },
        ],
        causal_separation: 1.5,
        noise_std: 0.8,
        seed: 424242,
    }
}

pub fn confounded3_model() -> ModelSpec {
    ModelSpec::new(vec![4, 8, 2], Activation::Tanh, 1).expect("static spec is valid")
}

/// The benchmark pairs equal per-cluster allocation with a per-cluster outer
/// batch: the per-class clusters isolate the minority samples whose
/// confounder pattern disagrees with their label, and drawing every cluster
/// equally keeps those samples from being drowned out of the loss.
pub fn confounded3_train() -> TrainConfig {
    TrainConfig {
        alpha: 0.05,
        beta: 0.1,
        epochs: 30,
        global_batch: 96,
        outer_batch: 48,
        clusters_per_class: 3,
        allocation: crate::trainers::AllocationScheme::Equal,
        outer_sampler: crate::trainers::OuterSampler::PerCluster,
        seed: 0,
        ..TrainConfig::default()
    }
}

pub fn pacs_like_data() -> SyntheticDomainSpec {
    SyntheticDomainSpec {
        class_count: 7,
        causal_dims: 8,
        confounder_dims: 4,
        domains: vec![
            DomainSpecEntry { confounder_correlation: 0.8, samples_per_class: 40 },
            DomainSpecEntry { confounder_correlation: 0.8, samples_per_class: 40 },
            DomainSpecEntry { confounder_correlation: 0.8, samples_per_class: 40 },
            DomainSpecEntry { confounder_correlation: 0.0, samples_per_class: 40 },
        ],
        causal_separation: 4.0,
        noise_std: 0.8,
        seed: 77,
    }
}

pub fn pacs_like_model() -> ModelSpec {
    ModelSpec::new(vec![12, 16, 7], Activation::Tanh, 1).expect("static spec is valid")
}

pub fn pacs_like_train() -> TrainConfig {
    TrainConfig { epochs: 20, ..TrainConfig::default() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, leave_one_domain_out};
    use crate::model::init_params;
    use crate::trainers::{train_erm, TrainConfig};
    use crate::Scalar;

    /// A linear probe on the confounder dims alone: near the agreement rate
    /// (1 + rho) / 2 = 0.95 on the training domains, chance on the held-out
    /// domain. This is the Bernoulli-mixture Bayes rate of the generator.
    #[test]
    fn confounder_probe_scores_095_train_05_test() {
        let data_spec = confounded3_data();
        let full = generate(&data_spec).unwrap();
        // Strip down to the confounder dims.
        let samples: Vec<crate::data::Sample> = full
            .samples()
            .iter()
            .map(|s| crate::data::Sample {
                features: s.features[data_spec.causal_dims..].to_vec(),
                label: s.label,
                domain: s.domain,
            })
            .collect();
        let conf_only = crate::data::DomainDataset::new(samples, 2, 3).unwrap();
        let (train, test) = leave_one_domain_out(&conf_only, CONFOUNDED3_TEST_DOMAIN).unwrap();

        let spec = ModelSpec::new(vec![2, 2], Activation::Tanh, 0).unwrap();
        let init = init_params(&spec, 3).unwrap();
        let config = TrainConfig { beta: 0.5, epochs: 60, outer_batch: 64, seed: 3, ..TrainConfig::default() };
        let (params, _) = train_erm(&config, &train, None, &spec, &init).unwrap();

        let train_acc = crate::trainers::evaluate(&params, &spec, &train).unwrap().accuracy;
        let test_acc = crate::trainers::evaluate(&params, &spec, &test).unwrap().accuracy;
        assert!((train_acc - 0.95).abs() < 0.02, "train probe accuracy {train_acc}");
        assert!((test_acc - 0.5 as Scalar).abs() < 0.08, "test probe accuracy {test_acc}");
    }

    #[test]
    fn pacs_like_shapes() {
        let data = generate(&pacs_like_data()).unwrap();
        assert_eq!(data.class_count(), 7);
        assert_eq!(data.domain_count(), 4);
        assert_eq!(data.feature_dim(), 12);
        pacs_like_train().validate().unwrap();
        confounded3_train().validate().unwrap();
    }
}
