use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QfitError, Result};
use crate::linalg::CVector;

use super::sharded_sampling;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SwapTestPlan {
    pub shots: u64,
    pub delta: Option<f64>,
    pub seed: u64,
}

impl SwapTestPlan {
    pub fn new(shots: u64, seed: u64) -> Self {
        Self { shots, delta: None, seed }
    }

    /// `⌈1/δ²⌉` shots.
    pub fn for_accuracy(delta: f64, seed: u64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(QfitError::InvalidConfig(format!("swap-test accuracy {delta} outside (0, 1]")));
        }
        Ok(Self { shots: (1.0 / (delta * delta) - 1e-9).ceil() as u64, delta: Some(delta), seed })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SwapTestResult {
    pub ones_observed: u64,
    pub shots: u64,
    /// Exact outcome-1 probability `(1 − |⟨A|B⟩|²)/2`.
    pub p_one_exact: f64,
    pub p_one_estimate: f64,
    pub overlap_sq_estimate: f64,
    pub std_error: f64,
}

/// Simulates the swap test between two normalized states.
pub fn swap_test(a: &CVector, b: &CVector, plan: &SwapTestPlan) -> Result<SwapTestResult> {
    if a.len() != b.len() {
        return Err(QfitError::Dimension(format!("swap test on dimensions {} and {}", a.len(), b.len())));
    }
    for v in [a, b] {
        if (v.norm_squared() - 1.0).abs() > 1e-10 {
            return Err(QfitError::InvalidConfig(format!("swap-test input has squared norm {}", v.norm_squared())));
        }
    }
    swap_test_from_overlap(a.dotc(b).norm_sqr(), plan)
}

/// Swap test between states whose squared overlap is `overlap_sq`.
pub fn swap_test_from_overlap(overlap_sq: f64, plan: &SwapTestPlan) -> Result<SwapTestResult> {
    if plan.shots == 0 {
        return Err(QfitError::ZeroShots);
    }
    let overlap_sq = overlap_sq.clamp(0.0, 1.0);
    let p_one_exact = ((1.0 - overlap_sq) / 2.0).clamp(0.0, 0.5);
    let ones_observed = sharded_sampling(plan.shots, plan.seed, 0u64, |n, rng, ones| {
        for _ in 0..n {
            if rng.random::<f64>() < p_one_exact {
                *ones += 1;
            }
        }
    });
    let p = ones_observed as f64 / plan.shots as f64;
    Ok(SwapTestResult {
        ones_observed,
        shots: plan.shots,
        p_one_exact,
        p_one_estimate: p,
        overlap_sq_estimate: (1.0 - 2.0 * p).clamp(0.0, 1.0),
        std_error: 2.0 * (p * (1.0 - p) / plan.shots as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cv(values: &[f64]) -> CVector {
        CVector::from_iterator(values.len(), values.iter().map(|&x| c64(x, 0.0)))
    }

    #[test]
    fn identical_states_never_read_one() {
        let a = cv(&[0.6, 0.8]);
        let r = swap_test(&a, &a, &SwapTestPlan::new(1000, 3)).unwrap();
        assert_eq!(r.ones_observed, 0);
        assert_eq!(r.overlap_sq_estimate, 1.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn orthogonal_and_half_overlap() {
        let r = swap_test(&cv(&[1.0, 0.0]), &cv(&[0.0, 1.0]), &SwapTestPlan::new(10, 0)).unwrap();
        assert_eq!(r.p_one_exact, 0.5);
        let r = swap_test(&cv(&[1.0, 0.0]), &cv(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]), &SwapTestPlan::new(10_000, 0)).unwrap();
        assert!((r.p_one_exact - 0.25).abs() < 1e-15);
        assert!((r.overlap_sq_estimate - 0.5).abs() < 0.03);
    }

    #[test]
    fn plan_and_errors() {
        assert_eq!(SwapTestPlan::for_accuracy(0.01, 0).unwrap().shots, 10_000);
        assert_eq!(SwapTestPlan::for_accuracy(1.0, 0).unwrap().shots, 1);
        assert!(SwapTestPlan::for_accuracy(0.0, 0).is_err());
        let a = cv(&[1.0]);
        assert!(matches!(swap_test(&a, &a, &SwapTestPlan::new(0, 0)), Err(QfitError::ZeroShots)));
        assert!(swap_test(&a, &cv(&[1.0, 0.0]), &SwapTestPlan::new(1, 0)).is_err());
    }

    #[test]
    fn seeded_reproducibility_and_shard_independence() {
        let a = cv(&[1.0, 0.0]);
        let b = cv(&[0.6, 0.8]);
        let r1 = swap_test(&a, &b, &SwapTestPlan::new(20_000, 5)).unwrap();
        let r2 = swap_test(&a, &b, &SwapTestPlan::new(20_000, 5)).unwrap();
        assert_eq!(r1, r2);
        assert_ne!(r1.ones_observed, swap_test(&a, &b, &SwapTestPlan::new(20_000, 6)).unwrap().ones_observed);
    }
}
