//! Mini-batch construction: stratified (clustering-then-sampling), naive
//! random, and class-weighted random, plus the sampler difference metric.

mod allocation;
mod difference;
mod draw;

pub use allocation::{equal_allocation, proportional_allocation, Allocation};
pub use difference::{sampler_difference_e, DifferenceMetric};
pub use draw::{draw, SamplerKind};
