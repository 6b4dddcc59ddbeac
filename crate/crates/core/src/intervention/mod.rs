//! The two-stage update's mathematical core: global-scope gradient,
//! virtual parameter update, Taylor-residual diagnostics, and the analytic
//! plus Monte-Carlo standard-error machinery comparing sampling strategies.

mod global;
mod monte_carlo;
mod se;
mod taylor;

pub use global::{global_gradient, virtual_update, virtual_update_scoped, GradientEstimate, VirtualScope};
pub use monte_carlo::{allocation_rounding_bias, monte_carlo_se, se_report, McEstimate, SeReport};
pub use se::{se_ours, se_random, SeMode};
pub use taylor::taylor_residual;
