//! Deterministic summation and sample statistics.

use serde::{Deserialize, Serialize};

/// Pairwise (tree) summation; the result depends only on the input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean, unbiased variance and their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMoments {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// Standard error of the unbiased variance, `√((m₄ - (T-3)/(T-1)·s⁴)/T)`.
    pub se_variance: f64,
}

impl SampleMoments {
    /// Needs at least two samples.
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        let t = xs.len();
        if t < 2 {
            return None;
        }
        let tf = t as f64;
        let m = mean(xs);
        let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
        let quad: Vec<f64> = sq.iter().map(|s| s * s).collect();
        let ss = pairwise_sum(&sq);
        let variance = ss / (tf - 1.0);
        let m4 = pairwise_sum(&quad) / tf;
        let var_of_var = (m4 - (tf - 3.0) / (tf - 1.0) * variance * variance) / tf;
        Some(SampleMoments {
            count: t,
            mean: m,
            variance,
            se_mean: (variance / tf).sqrt(),
            se_variance: var_of_var.max(0.0).sqrt(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
    }

    #[test]
    fn moments_of_small_sample() {
        let m = SampleMoments::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((m.se_mean - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!(SampleMoments::from_samples(&[1.0]).is_none());
    }
}
