//! Histogram difference metric between two samplers' batches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `E = sum_k |N_k - R_k|` between two per-cluster histograms with equal
/// totals, plus the ratio `E / M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceMetric {
    pub e: u64,
    pub ratio: f64,
}

pub fn sampler_difference_e(a: &[usize], b: &[usize]) -> Result<DifferenceMetric> {
    if a.len() != b.len() {
        return Err(Error::config(format!(
            "histograms cover {} and {} clusters",
            a.len(),
            b.len()
        )));
    }
    let total_a: usize = a.iter().sum();
    let total_b: usize = b.iter().sum();
    if total_a != total_b {
        return Err(Error::config(format!("histogram totals differ: {total_a} vs {total_b}")));
    }
    let e: u64 = a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u64).sum();
    let ratio = if total_a == 0 { 0.0 } else { e as f64 / total_a as f64 };
    Ok(DifferenceMetric { e, ratio })
}
