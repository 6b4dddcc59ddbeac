//! Desk-scale laboratory for causal feature learning built around a
//! clustering-then-sampling gradient estimator.
//!
//! The crate provides:
//!
//! - a minimal dense-network kernel with an explicit encoder/head split,
//!   exact reverse-mode gradients, and finite-difference Hessian-vector
//!   products ([`model`]);
//! - per-class k-means and per-cluster gradient statistics ([`clustering`]);
//! - stratified, random, and class-weighted batch samplers with
//!   largest-remainder allocation ([`sampling`]);
//! - the global-gradient estimator, virtual parameter update,
//!   Taylor-residual diagnostics, and analytic + Monte-Carlo standard-error
//!   machinery ([`intervention`]);
//! - ERM, MAML, and CICF trainers with a leave-one-domain-out harness
//!   ([`trainers`]);
//! - synthetic confounded multi-domain data generation and CSV ingestion
//!   ([`data`]).
//!
//! Numeric kernels are generic over the [`Real`] scalar trait; datasets,
//! trainers, and all file formats are pinned to [`Scalar`] (`f64`).

pub mod clustering;
pub mod data;
pub mod error;
pub mod intervention;
pub mod model;
pub mod presets;
pub mod rng;
pub mod sampling;
mod scalar;
pub mod trainers;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};
