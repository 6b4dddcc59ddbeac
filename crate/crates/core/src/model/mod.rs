//! Dense-network kernel: architecture spec, flat parameters, exact gradients,
//! and finite-difference Hessian-vector products.

mod batch;
mod hvp;
mod kernel;
mod params;
mod spec;

pub use batch::Batch;
pub use hvp::{hvp, hvp_with, DEFAULT_HVP_EPS};
pub use kernel::{batch_loss, forward, loss_and_grad, sample_gradient, softmax_cross_entropy};
pub use params::{init_params, ParamVector};
pub use spec::{Activation, LayerDims, Manifest, ModelSpec};
