//! Analytic standard errors of batch-gradient estimators.
//!
//! "Standard error" here is the mean squared Euclidean deviation of the
//! estimator from the population-mean gradient, matching the scalar variance
//! convention of `ClusterGradientStats`. The exact forms carry the
//! finite-population correction for sampling without replacement; the
//! approximate forms drop it.

use crate::error::{Error, Result};
use crate::Real;

/// Whether to apply the finite-population correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeMode {
    Exact,
    Approx,
}

/// Finite-population correction `1 - (n - 1) / (n_pop - 1)` for a
/// without-replacement sample of `n` out of `n_pop`.
fn fpc<R: Real>(n: usize, n_pop: usize) -> R {
    R::one() - R::from_count(n - 1) / R::from_count(n_pop - 1)
}

/// One stratum's exact contribution `p^2 * fpc * sigma2 / n`. A stratum of
/// population 1 is a census and contributes nothing.
fn stratum_exact<R: Real>(p: R, n: usize, n_pop: usize, sigma2: R) -> R {
    if n_pop == 1 {
        return R::zero();
    }
    p * p * fpc::<R>(n, n_pop) * sigma2 / R::from_count(n)
}

/// One stratum's approximate contribution `p * sigma2 / m`.
fn stratum_approx<R: Real>(p: R, sigma2: R, m: usize) -> R {
    p * sigma2 / R::from_count(m)
}

/// SE of the random mini-batch estimator: `(sigma2 / M) * (1 - (M-1)/(N-1))`
/// exactly, `sigma2 / M` approximately.
pub fn se_random<R: Real>(sigma2: R, m: usize, n: usize, mode: SeMode) -> Result<R> {
    if sigma2 < R::zero() {
        return Err(Error::Domain(format!("sigma2 must be >= 0, got {sigma2}")));
    }
    if m == 0 {
        return Err(Error::Domain("batch size must be >= 1".to_string()));
    }
    if n < 2 {
        return Err(Error::Domain("population must have >= 2 samples".to_string()));
    }
    if m > n {
        return Err(Error::Domain(format!("batch size {m} exceeds population {n}")));
    }
    Ok(match mode {
        SeMode::Exact => stratum_exact(R::one(), m, n, sigma2),
        SeMode::Approx => stratum_approx(R::one(), sigma2, m),
    })
}

/// SE of the clustering-then-sampling estimator:
/// `sum_k P_k^2 * (1/N_k) * (1 - (N_k-1)/(N_k^K-1)) * sigma2_k` exactly,
/// `sum_k (P_k / M) * sigma2_k` approximately (with `M = sum_k N_k`).
///
/// Exact mode requires every cluster to draw at least one sample; clusters
/// allocated zero contribute their quota term only in approx mode. With a
/// single cluster both modes reduce bitwise to `se_random`.
pub fn se_ours<R: Real>(
    weights: &[R],
    allocations: &[usize],
    cluster_sizes: &[usize],
    sigma2_k: &[R],
    mode: SeMode,
) -> Result<R> {
    let k_total = weights.len();
    if allocations.len() != k_total || cluster_sizes.len() != k_total || sigma2_k.len() != k_total {
        return Err(Error::Domain(format!(
            "length mismatch: weights {k_total}, allocations {}, sizes {}, sigma2 {}",
            allocations.len(),
            cluster_sizes.len(),
            sigma2_k.len()
        )));
    }
    if k_total == 0 {
        return Err(Error::Domain("need at least one cluster".to_string()));
    }
    let m: usize = allocations.iter().sum();
    let mut total = R::zero();
    for k in 0..k_total {
        if sigma2_k[k] < R::zero() {
            return Err(Error::Domain(format!("sigma2_k[{k}] must be >= 0")));
        }
        match mode {
            SeMode::Exact => {
                if allocations[k] == 0 {
                    return Err(Error::Domain(format!(
                        "exact mode needs N_k >= 1; cluster {k} draws 0 samples"
                    )));
                }
                if allocations[k] > cluster_sizes[k] {
                    return Err(Error::Domain(format!(
                        "cluster {k} draws {} out of {}",
                        allocations[k], cluster_sizes[k]
                    )));
                }
                total = total + stratum_exact(weights[k], allocations[k], cluster_sizes[k], sigma2_k[k]);
            }
            SeMode::Approx => {
                if m == 0 {
                    return Err(Error::Domain("approx mode needs a positive total batch size".to_string()));
                }
                total = total + stratum_approx(weights[k], sigma2_k[k], m);
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn census_has_zero_error() {
        assert_eq!(se_random(2.0f64, 100, 100, SeMode::Exact).unwrap(), 0.0);
    }

    #[test]
    fn textbook_values() {
        let exact = se_random(2.0f64, 4, 100, SeMode::Exact).unwrap();
        assert_relative_eq!(exact, 0.5 * (96.0 / 99.0), max_relative = 1e-15);
        let approx = se_random(2.0f64, 4, 100, SeMode::Approx).unwrap();
        assert_relative_eq!(approx, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn zero_variance_gives_zero() {
        assert_eq!(se_random(0.0f64, 5, 50, SeMode::Exact).unwrap(), 0.0);
        assert_eq!(se_random(0.0f64, 5, 50, SeMode::Approx).unwrap(), 0.0);
    }

    #[test]
    fn rejects_m_above_n() {
        assert!(matches!(se_random(1.0f64, 10, 5, SeMode::Exact), Err(Error::Domain(_))));
    }

    #[test]
    fn single_cluster_reduces_to_se_random_bitwise() {
        let sigma2 = 1.73;
        for (m, n) in [(4usize, 60usize), (8, 60), (16, 60), (3, 7)] {
            let ours = se_ours(&[1.0f64], &[m], &[n], &[sigma2], SeMode::Exact).unwrap();
            let random = se_random(sigma2, m, n, SeMode::Exact).unwrap();
            assert_eq!(ours, random);
            let ours_a = se_ours(&[1.0f64], &[m], &[n], &[sigma2], SeMode::Approx).unwrap();
            let random_a = se_random(sigma2, m, n, SeMode::Approx).unwrap();
            assert_eq!(ours_a, random_a);
        }
    }

    #[test]
    fn balanced_two_cluster_approx() {
        let se = se_ours(&[0.5f64, 0.5], &[5, 5], &[50, 50], &[1.0, 1.0], SeMode::Approx).unwrap();
        assert_relative_eq!(se, 0.1, max_relative = 1e-15);
    }

    #[test]
    fn separated_clusters_beat_random_in_approx() {
        // Law of total variance: sigma2 = within + between, between > 0.
        let weights = [0.5f64, 0.5];
        let sigma2_k = [1.0f64, 1.0];
        let between = 4.0;
        let sigma2 = 0.5 * sigma2_k[0] + 0.5 * sigma2_k[1] + between;
        let m = 10;
        let ours = se_ours(&weights, &[5, 5], &[50, 50], &sigma2_k, SeMode::Approx).unwrap();
        let random = se_random(sigma2, m, 100, SeMode::Approx).unwrap();
        assert!(ours < random);
        assert_relative_eq!(random - ours, between / m as f64, max_relative = 1e-12);
    }

    #[test]
    fn length_mismatch_is_domain_error() {
        assert!(matches!(
            se_ours(&[1.0f64], &[1, 2], &[3], &[0.5], SeMode::Exact),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn exact_mode_rejects_unallocated_cluster() {
        assert!(matches!(
            se_ours(&[0.5f64, 0.5], &[4, 0], &[10, 10], &[1.0, 1.0], SeMode::Exact),
            Err(Error::Domain(_))
        ));
        // approx mode accepts the same allocation
        assert!(se_ours(&[0.5f64, 0.5], &[4, 0], &[10, 10], &[1.0, 1.0], SeMode::Approx).is_ok());
    }

    #[test]
    fn generic_over_f32() {
        let se = se_random(1.0f32, 4, 100, SeMode::Exact).unwrap();
        assert!((se - 0.25 * (96.0 / 99.0)).abs() < 1e-6);
    }
}
