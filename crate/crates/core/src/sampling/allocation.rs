//! Per-cluster batch-size allocation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-cluster draw counts summing to the batch size `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    counts: Vec<usize>,
    total: usize,
}

impl Allocation {
    pub fn new(counts: Vec<usize>) -> Self {
        let total = counts.iter().sum();
        Allocation { counts, total }
    }

    #[inline]
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    #[inline]
    pub fn total(&self) -> usize {
        self.total
    }

    #[inline]
    pub fn cluster_count(&self) -> usize {
        self.counts.len()
    }
}

/// Largest-remainder apportionment of `m` slots proportional to `sizes`.
///
/// Quotas `q_k = m * sizes_k / N` are floored; leftover slots go to the
/// largest fractional remainders, ties broken by lower cluster index. All
/// remainder arithmetic is integer-exact. Counts never exceed the cluster
/// sizes; should a cap ever bind, the overflow is redistributed by the same
/// rule.
pub fn proportional_allocation(sizes: &[usize], m: usize) -> Result<Allocation> {
    if sizes.is_empty() {
        return Err(Error::config("allocation needs at least one cluster"));
    }
    let n: usize = sizes.iter().sum();
    if m == 0 {
        return Err(Error::config("batch size must be >= 1"));
    }
    if m > n {
        return Err(Error::config(format!("batch size {m} exceeds population {n}")));
    }

    // Integer floors and remainders of q_k = m * sizes_k / n.
    let mut counts: Vec<usize> = Vec::with_capacity(sizes.len());
    let mut remainders: Vec<u128> = Vec::with_capacity(sizes.len());
    for &s in sizes {
        let prod = m as u128 * s as u128;
        counts.push((prod / n as u128) as usize);
        remainders.push(prod % n as u128);
    }
    let mut leftover = m - counts.iter().sum::<usize>();

    // Remainder ranking: largest first, then lower index.
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));

    for &k in &order {
        if leftover == 0 {
            break;
        }
        if counts[k] < sizes[k] && remainders[k] > 0 {
            counts[k] += 1;
            leftover -= 1;
        }
    }
    // Cap overflow fallback: hand remaining slots to clusters with capacity,
    // in ranking order. (Unreachable for m <= n with exact quotas, kept for
    // robustness.)
    while leftover > 0 {
        let mut placed = false;
        for &k in &order {
            if leftover == 0 {
                break;
            }
            if counts[k] < sizes[k] {
                counts[k] += 1;
                leftover -= 1;
                placed = true;
            }
        }
        if !placed {
            return Err(Error::Allocation(format!("cannot place {leftover} slots, clusters are full")));
        }
    }

    Ok(Allocation::new(counts))
}

/// Even split of `m` slots over `k_total` clusters: `floor(m / k_total)`
/// each, remainder to the lowest indices. With `m < k_total` the first `m`
/// clusters get one slot each (logged as a warning).
pub fn equal_allocation(k_total: usize, m: usize) -> Result<Allocation> {
    if k_total == 0 {
        return Err(Error::config("allocation needs at least one cluster"));
    }
    if m == 0 {
        return Err(Error::config("batch size must be >= 1"));
    }
    if m < k_total {
        log::warn!("batch size {m} below cluster count {k_total}; only the first {m} clusters draw");
    }
    let base = m / k_total;
    let extra = m % k_total;
    let counts = (0..k_total).map(|k| base + usize::from(k < extra)).collect();
    Ok(Allocation::new(counts))
}
