//! Classification evaluation.

use crate::data::DomainDataset;
use crate::error::Result;
use crate::model::{batch_loss, forward, ModelSpec, ParamVector};
use crate::Scalar;

/// Accuracy plus the per-class confusion counts (`confusion[true][pred]`).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: Scalar,
    pub confusion: Vec<Vec<usize>>,
    pub correct: usize,
    pub total: usize,
}

/// Argmax of the logits; ties resolve to the lowest class index.
pub fn predict(params: &ParamVector, spec: &ModelSpec, x: &[Scalar]) -> Result<usize> {
    let (_, logits) = forward(params, spec, x)?;
    let mut best = 0usize;
    for (i, &v) in logits.iter().enumerate() {
        if v > logits[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Evaluates the given sample ids.
pub fn evaluate_indices(
    params: &ParamVector,
    spec: &ModelSpec,
    dataset: &DomainDataset,
    indices: &[usize],
) -> Result<EvalReport> {
    let classes = spec.class_count();
    let mut confusion = vec![vec![0usize; classes]; classes];
    let mut correct = 0usize;
    for &i in indices {
        let s = dataset.sample(i);
        let pred = predict(params, spec, &s.features)?;
        confusion[s.label][pred] += 1;
        if pred == s.label {
            correct += 1;
        }
    }
    Ok(EvalReport {
        accuracy: correct as Scalar / indices.len() as Scalar,
        confusion,
        correct,
        total: indices.len(),
    })
}

/// Evaluates the whole dataset.
pub fn evaluate(params: &ParamVector, spec: &ModelSpec, dataset: &DomainDataset) -> Result<EvalReport> {
    let indices: Vec<usize> = (0..dataset.len()).collect();
    evaluate_indices(params, spec, dataset, &indices)
}

/// Per-domain accuracy and mean loss, for every domain present.
pub fn evaluate_by_domain(
    params: &ParamVector,
    spec: &ModelSpec,
    dataset: &DomainDataset,
) -> Result<Vec<(usize, Scalar, Scalar)>> {
    let mut out = Vec::new();
    for d in dataset.domains_present() {
        let members = dataset.domain_members(d);
        let report = evaluate_indices(params, spec, dataset, &members)?;
        let loss = batch_loss(params, spec, &dataset.batch_from_indices(&members)?)?;
        out.push((d, loss, report.accuracy));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use crate::model::Activation;

    fn dataset_with_majority_class_zero() -> DomainDataset {
        let mut samples = Vec::new();
        for i in 0..10 {
            samples.push(Sample {
                features: vec![i as Scalar],
                label: usize::from(i >= 7),
                domain: 0,
            });
        }
        DomainDataset::new(samples, 2, 1).unwrap()
    }

    #[test]
    fn uniform_logits_predict_lowest_class() {
        let spec = ModelSpec::new(vec![1, 2], Activation::Tanh, 0).unwrap();
        let params = ParamVector::zeros(&spec);
        let data = dataset_with_majority_class_zero();
        let report = evaluate(&params, &spec, &data).unwrap();
        // All-zero logits tie; the tie-break predicts class 0, the majority.
        assert_eq!(report.accuracy, 0.7);
        assert_eq!(report.confusion[0][0], 7);
        assert_eq!(report.confusion[1][0], 3);
    }

    #[test]
    fn memorizing_model_scores_one() {
        // Weights chosen so the logit of the true class dominates.
        let spec = ModelSpec::new(vec![2, 2], Activation::Tanh, 0).unwrap();
        let mut params = ParamVector::zeros(&spec);
        params.values_mut()[0] = 5.0; // logit0 <- x0
        params.values_mut()[3] = 5.0; // logit1 <- x1
        let samples = vec![
            Sample { features: vec![1.0, 0.0], label: 0, domain: 0 },
            Sample { features: vec![0.0, 1.0], label: 1, domain: 1 },
        ];
        let data = DomainDataset::new(samples, 2, 2).unwrap();
        let report = evaluate(&params, &spec, &data).unwrap();
        assert_eq!(report.accuracy, 1.0);
    }

    #[test]
    fn confusion_counts_partition_the_dataset() {
        let spec = ModelSpec::new(vec![1, 2], Activation::Relu, 0).unwrap();
        let params = crate::model::init_params(&spec, 3).unwrap();
        let data = dataset_with_majority_class_zero();
        let report = evaluate(&params, &spec, &data).unwrap();
        let total: usize = report.confusion.iter().flatten().sum();
        assert_eq!(total, data.len());
        assert_eq!(report.total, data.len());
    }

    #[test]
    fn per_domain_accuracies() {
        let spec = ModelSpec::new(vec![1, 2], Activation::Tanh, 0).unwrap();
        let params = ParamVector::zeros(&spec);
        let samples = vec![
            Sample { features: vec![0.0], label: 0, domain: 0 },
            Sample { features: vec![0.0], label: 1, domain: 2 },
        ];
        let data = DomainDataset::new(samples, 2, 3).unwrap();
        let by_domain = evaluate_by_domain(&params, &spec, &data).unwrap();
        assert_eq!(by_domain.len(), 2);
        assert_eq!(by_domain[0].0, 0);
        assert_eq!(by_domain[0].2, 1.0);
        assert_eq!(by_domain[1].0, 2);
        assert_eq!(by_domain[1].2, 0.0);
    }
}
