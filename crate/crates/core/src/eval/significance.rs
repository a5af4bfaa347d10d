use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derived;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub observed_delta: f64,
    /// `(count + 1)/(iterations + 1)`.
    pub p_value: f64,
    /// Shuffles whose delta reached the observed one.
    pub count: usize,
    pub iterations: usize,
    pub seed: u64,
}

/// Approximate randomization on per-item scores with the mean as metric.
pub fn approx_randomization(
    scores_a: &[f64],
    scores_b: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<SignificanceResult> {
    approx_randomization_by(scores_a, scores_b, iterations, seed, |s: &[f64]| {
        s.iter().sum::<f64>() / s.len() as f64
    })
}

/// Approximate randomization with an arbitrary corpus-level metric. Each
/// iteration swaps every item's A/B outputs with probability ½ and
/// recomputes `metric` on both sides.
pub fn approx_randomization_by<T, F>(
    a: &[T],
    b: &[T],
    iterations: usize,
    seed: u64,
    metric: F,
) -> Result<SignificanceResult>
where
    T: Clone,
    F: Fn(&[T]) -> f64,
{
    if a.len() != b.len() {
        return Err(Error::shape(format!("{} vs {} items", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::validation("significance test on zero items"));
    }
    if iterations == 0 {
        return Err(Error::validation("at least one randomization is required"));
    }
    let observed = (metric(a) - metric(b)).abs();
    if !observed.is_finite() {
        return Err(Error::NonFinite("metric is not finite".into()));
    }
    // Float noise in recomputed metrics should not break exact ties.
    let threshold = observed - 1e-12 * observed.abs().max(1.0);
    let mut pa = a.to_vec();
    let mut pb = b.to_vec();
    let mut count = 0;
    for i in 0..iterations {
        let mut rng = derived(seed, i as u64);
        for j in 0..a.len() {
            if rng.random_bool(0.5) {
                pa[j] = b[j].clone();
                pb[j] = a[j].clone();
            } else {
                pa[j] = a[j].clone();
                pb[j] = b[j].clone();
            }
        }
        if (metric(&pa) - metric(&pb)).abs() >= threshold {
            count += 1;
        }
    }
    Ok(SignificanceResult {
        observed_delta: observed,
        p_value: (count + 1) as f64 / (iterations + 1) as f64,
        count,
        iterations,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_systems() {
        let a = [0.0, 1.0, 1.0, 0.0];
        let r = approx_randomization(&a, &a, 100, 3).unwrap();
        assert_eq!(r.observed_delta, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn constant_advantage() {
        let b = vec![0.0; 1000];
        let a = vec![10.0; 1000];
        let r = approx_randomization(&a, &b, 1000, 9).unwrap();
        assert_eq!(r.count, 0);
        assert!((r.p_value - 1.0 / 1001.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert!(approx_randomization(&[1.0], &[1.0, 2.0], 10, 0).is_err());
    }
}
