//! Forward pass, softmax cross-entropy, and exact reverse-mode gradients.
//!
//! The kernel is a pure function of `(params, spec, input)`: no RNG, no
//! interior mutability. Batch gradients accumulate in row order and are
//! divided by the row count at the end, so the summation order is fixed.

use crate::error::{Error, Result};
use crate::model::batch::Batch;
use crate::model::params::ParamVector;
use crate::model::spec::ModelSpec;
use crate::Real;

/// Post-activation outputs at every layer boundary: `acts[0]` is the input,
/// `acts[l + 1]` the output of layer `l`, `acts[L]` the logits.
struct Trace<R> {
    acts: Vec<Vec<R>>,
}

fn forward_trace<R: Real>(params: &ParamVector<R>, spec: &ModelSpec, x: &[R]) -> Result<Trace<R>> {
    if x.len() != spec.input_dim() {
        return Err(Error::shape(format!(
            "input has {} features, model expects {}",
            x.len(),
            spec.input_dim()
        )));
    }
    let num_layers = spec.num_layers();
    let mut acts = Vec::with_capacity(num_layers + 1);
    acts.push(x.to_vec());
    for l in 0..num_layers {
        let weights = params.weights(l);
        let biases = params.biases(l);
        let input = &acts[l];
        let rows = biases.len();
        let cols = input.len();
        let mut out = Vec::with_capacity(rows);
        for r in 0..rows {
            let mut sum = biases[r];
            let row = &weights[r * cols..(r + 1) * cols];
            for (w, v) in row.iter().zip(input) {
                sum = sum + *w * *v;
            }
            if l + 1 < num_layers {
                sum = spec.activation.forward(sum);
            }
            if !sum.is_finite() {
                return Err(Error::Numeric(format!("non-finite activation in layer {l}")));
            }
            out.push(sum);
        }
        acts.push(out);
    }
    Ok(Trace { acts })
}

/// Runs the network on one input.
///
/// Returns `(z, logits)` where `z` is the encoder output at the split point
/// (the input itself when `split_index = 0`).
pub fn forward<R: Real>(params: &ParamVector<R>, spec: &ModelSpec, x: &[R]) -> Result<(Vec<R>, Vec<R>)> {
    let trace = forward_trace(params, spec, x)?;
    let z = trace.acts[spec.split_index].clone();
    let logits = trace.acts.last().expect("trace has at least the input").clone();
    Ok((z, logits))
}

/// Numerically stable softmax cross-entropy for one sample.
///
/// Returns the loss and the gradient w.r.t. the logits (`softmax - onehot`).
pub fn softmax_cross_entropy<R: Real>(logits: &[R], label: usize) -> Result<(R, Vec<R>)> {
    if label >= logits.len() {
        return Err(Error::shape(format!(
            "label {label} out of range for {} logits",
            logits.len()
        )));
    }
    let max = logits.iter().cloned().fold(R::neg_infinity(), R::max);
    let mut exp_sum = R::zero();
    let mut probs = Vec::with_capacity(logits.len());
    for &v in logits {
        let e = (v - max).exp();
        exp_sum = exp_sum + e;
        probs.push(e);
    }
    let loss = exp_sum.ln() + max - logits[label];
    let mut dlogits = probs;
    for (i, p) in dlogits.iter_mut().enumerate() {
        *p = *p / exp_sum;
        if i == label {
            *p = *p - R::one();
        }
    }
    Ok((loss, dlogits))
}

/// Mean softmax cross-entropy over a batch together with the exact gradient
/// w.r.t. all parameters (encoder and head alike).
pub fn loss_and_grad<R: Real>(
    params: &ParamVector<R>,
    spec: &ModelSpec,
    batch: &Batch<R>,
) -> Result<(R, Vec<R>)> {
    if batch.is_empty() {
        return Err(Error::data("cannot take gradients over an empty batch"));
    }
    let num_layers = spec.num_layers();
    let manifest = params.manifest();
    let mut grad = vec![R::zero(); params.len()];
    let mut total_loss = R::zero();

    for (row, (&label, x)) in batch.labels.iter().zip(&batch.features).enumerate() {
        if label >= spec.class_count() {
            return Err(Error::data(format!(
                "batch row {row} has label {label}, model has {} classes",
                spec.class_count()
            )));
        }
        let trace = forward_trace(params, spec, x)?;
        let logits = trace.acts.last().expect("nonempty trace");
        let (loss, dlogits) = softmax_cross_entropy(logits, label)?;
        total_loss = total_loss + loss;

        // Backprop: delta holds dL/d(acts[l + 1]) while visiting layer l.
        let mut delta = dlogits;
        for l in (0..num_layers).rev() {
            let input = &trace.acts[l];
            let output = &trace.acts[l + 1];
            // Hidden layers fold the activation derivative into delta;
            // the top layer has none.
            if l + 1 < num_layers {
                for (d, &y) in delta.iter_mut().zip(output) {
                    *d = *d * spec.activation.grad_from_output(y);
                }
            }
            let (w_range, b_range) = manifest.layer_ranges(l);
            let weights = params.weights(l);
            let cols = input.len();
            {
                let gw = &mut grad[w_range];
                for (r, &d) in delta.iter().enumerate() {
                    let grow = &mut gw[r * cols..(r + 1) * cols];
                    for (g, &v) in grow.iter_mut().zip(input) {
                        *g = *g + d * v;
                    }
                }
            }
            {
                let gb = &mut grad[b_range];
                for (g, &d) in gb.iter_mut().zip(&delta) {
                    *g = *g + d;
                }
            }
            if l > 0 {
                let mut next = vec![R::zero(); cols];
                for (r, &d) in delta.iter().enumerate() {
                    let wrow = &weights[r * cols..(r + 1) * cols];
                    for (n, &w) in next.iter_mut().zip(wrow) {
                        *n = *n + w * d;
                    }
                }
                delta = next;
            }
        }
    }

    let scale = R::from_count(batch.len());
    for g in &mut grad {
        *g = *g / scale;
    }
    Ok((total_loss / scale, grad))
}

/// Mean batch loss without the gradient.
pub fn batch_loss<R: Real>(params: &ParamVector<R>, spec: &ModelSpec, batch: &Batch<R>) -> Result<R> {
    if batch.is_empty() {
        return Err(Error::data("cannot evaluate an empty batch"));
    }
    let mut total = R::zero();
    for (x, &label) in batch.features.iter().zip(&batch.labels) {
        let trace = forward_trace(params, spec, x)?;
        let (loss, _) = softmax_cross_entropy(trace.acts.last().expect("nonempty trace"), label)?;
        total = total + loss;
    }
    Ok(total / R::from_count(batch.len()))
}

/// Gradient of the loss on a single sample.
pub fn sample_gradient<R: Real>(
    params: &ParamVector<R>,
    spec: &ModelSpec,
    features: &[R],
    label: usize,
) -> Result<Vec<R>> {
    let batch = Batch::single(features.to_vec(), label, 0);
    loss_and_grad(params, spec, &batch).map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::init_params;
    use crate::model::spec::Activation;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec_232() -> ModelSpec {
        ModelSpec::new(vec![2, 3, 2], Activation::Tanh, 1).unwrap()
    }

    #[test]
    fn zero_params_give_zero_logits() {
        let spec = spec_232();
        let params = ParamVector::<f64>::zeros(&spec);
        let (_, logits) = forward(&params, &spec, &[0.3, -1.2]).unwrap();
        assert_eq!(logits, vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let spec = ModelSpec::new(vec![3, 3], Activation::Relu, 0).unwrap();
        let mut params = ParamVector::<f64>::zeros(&spec);
        for i in 0..3 {
            params.values_mut()[i * 3 + i] = 1.0;
        }
        let x = [0.5, -2.0, 7.25];
        let (z, logits) = forward(&params, &spec, &x).unwrap();
        assert_eq!(z, x.to_vec());
        assert_eq!(logits, x.to_vec());
    }

    /// Straight-line matrix multiply, written independently of the kernel.
    fn oracle_232(params: &ParamVector<f64>, x: &[f64]) -> Vec<f64> {
        let w0 = params.weights(0);
        let b0 = params.biases(0);
        let mut h = [0.0f64; 3];
        for r in 0..3 {
            h[r] = (w0[r * 2] * x[0] + w0[r * 2 + 1] * x[1] + b0[r]).tanh();
        }
        let w1 = params.weights(1);
        let b1 = params.biases(1);
        let mut out = vec![0.0f64; 2];
        for r in 0..2 {
            out[r] = w1[r * 3] * h[0] + w1[r * 3 + 1] * h[1] + w1[r * 3 + 2] * h[2] + b1[r];
        }
        out
    }

    #[test]
    fn forward_matches_hand_rolled_oracle() {
        let spec = spec_232();
        let params: ParamVector = init_params(&spec, 42).unwrap();
        let x = [0.7, -0.4];
        let (_, logits) = forward(&params, &spec, &x).unwrap();
        let expected = oracle_232(&params, &x);
        for (a, b) in logits.iter().zip(&expected) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn forward_rejects_wrong_input_dim() {
        let spec = spec_232();
        let params: ParamVector = init_params(&spec, 0).unwrap();
        assert!(matches!(forward(&params, &spec, &[1.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn uniform_logits_loss_is_ln2() {
        let (loss, dlogits) = softmax_cross_entropy(&[0.0f64, 0.0], 0).unwrap();
        assert_relative_eq!(loss, std::f64::consts::LN_2, max_relative = 1e-12);
        assert_relative_eq!(dlogits[0], -0.5, max_relative = 1e-12);
        assert_relative_eq!(dlogits[1], 0.5, max_relative = 1e-12);
    }

    #[test]
    fn duplicated_sample_keeps_mean_loss_and_grad() {
        let spec = spec_232();
        let params: ParamVector = init_params(&spec, 9).unwrap();
        let one = Batch::new(vec![vec![0.2, 0.4]], vec![1], vec![0]).unwrap();
        let two = Batch::new(vec![vec![0.2, 0.4], vec![0.2, 0.4]], vec![1, 1], vec![0, 0]).unwrap();
        let (l1, g1) = loss_and_grad(&params, &spec, &one).unwrap();
        let (l2, g2) = loss_and_grad(&params, &spec, &two).unwrap();
        assert_relative_eq!(l1, l2, max_relative = 1e-15);
        for (a, b) in g1.iter().zip(&g2) {
            assert_relative_eq!(a, b, max_relative = 1e-14, epsilon = 1e-16);
        }
    }

    /// Central finite differences of the batch loss, the gradient oracle.
    pub(crate) fn fd_gradient(
        params: &ParamVector<f64>,
        spec: &ModelSpec,
        batch: &Batch<f64>,
        step: f64,
    ) -> Vec<f64> {
        let mut fd = vec![0.0; params.len()];
        for i in 0..params.len() {
            let mut plus = params.clone();
            plus.values_mut()[i] += step;
            let mut minus = params.clone();
            minus.values_mut()[i] -= step;
            let lp = batch_loss(&plus, spec, batch).unwrap();
            let lm = batch_loss(&minus, spec, batch).unwrap();
            fd[i] = (lp - lm) / (2.0 * step);
        }
        fd
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let spec = ModelSpec::new(vec![3, 4, 3], Activation::Tanh, 1).unwrap();
        let params: ParamVector = init_params(&spec, 11).unwrap();
        let mut feats = Vec::new();
        let mut labels = Vec::new();
        let mut rng = crate::rng::stream(11, "fixture", 0);
        for i in 0..5 {
            feats.push((0..3).map(|_| rand::Rng::gen::<f64>(&mut rng) * 2.0 - 1.0).collect());
            labels.push(i % 3);
        }
        let batch = Batch::new(feats, labels, (0..5).collect()).unwrap();
        let (_, grad) = loss_and_grad(&params, &spec, &batch).unwrap();
        let fd = fd_gradient(&params, &spec, &batch, 1e-5);
        let diff: f64 = grad.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let norm: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff / norm <= 1e-6, "relative error {} too large", diff / norm);
    }

    #[test]
    fn relu_gradient_matches_finite_differences() {
        let spec = ModelSpec::new(vec![3, 5, 2], Activation::Relu, 1).unwrap();
        let params: ParamVector = init_params(&spec, 4).unwrap();
        let batch = Batch::new(
            vec![vec![0.9, -0.3, 0.4], vec![-0.7, 0.6, 0.2]],
            vec![0, 1],
            vec![0, 1],
        )
        .unwrap();
        let (_, grad) = loss_and_grad(&params, &spec, &batch).unwrap();
        let fd = fd_gradient(&params, &spec, &batch, 1e-5);
        let diff: f64 = grad.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let norm: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff / norm <= 1e-6, "relative error {} too large", diff / norm);
    }

    #[test]
    fn split_index_changes_only_the_reported_intermediate() {
        let widths = vec![2, 4, 3, 2];
        let x = [0.3, -0.8];
        let mut all_logits = Vec::new();
        for s in 0..3 {
            let spec = ModelSpec::new(widths.clone(), Activation::Tanh, s).unwrap();
            let params: ParamVector = init_params(&spec, 21).unwrap();
            let (z, logits) = forward(&params, &spec, &x).unwrap();
            assert_eq!(z.len(), widths[s]);
            all_logits.push(logits);
        }
        assert_eq!(all_logits[0], all_logits[1]);
        assert_eq!(all_logits[1], all_logits[2]);
    }

    #[test]
    fn kernel_runs_at_f32() {
        let spec = spec_232();
        let params: ParamVector<f32> = init_params(&spec, 2).unwrap();
        let batch = Batch::new(vec![vec![0.5f32, 0.5]], vec![0], vec![0]).unwrap();
        let (loss, grad) = loss_and_grad(&params, &spec, &batch).unwrap();
        assert!(loss.is_finite());
        assert_eq!(grad.len(), params.len());
    }

    proptest! {
        #[test]
        fn softmax_is_shift_invariant(
            logits in proptest::collection::vec(-10.0f64..10.0, 2..6),
            shift in -5.0f64..5.0,
            label_ix in 0usize..6,
        ) {
            let label = label_ix % logits.len();
            let shifted: Vec<f64> = logits.iter().map(|v| v + shift).collect();
            let (l0, g0) = softmax_cross_entropy(&logits, label).unwrap();
            let (l1, g1) = softmax_cross_entropy(&shifted, label).unwrap();
            prop_assert!((l0 - l1).abs() <= 1e-12 * l0.abs().max(1.0));
            for (a, b) in g0.iter().zip(&g1) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
