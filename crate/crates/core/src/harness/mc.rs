use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::Matrix;
use crate::rng::{gaussian_matrix, substream, Purpose};

/// Monte Carlo estimate of `E‖V_{k,⊥}ᵀx‖²` over standard Gaussian `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    /// `‖V_{k,⊥}‖_F²`, the exact expectation.
    pub expected: f64,
    /// Fraction of draws with `‖V_{k,⊥}ᵀx‖ ≤ √(10n)`.
    pub markov_frequency: f64,
}

impl McEstimate {
    /// Mean within four standard errors of the exact value.
    pub fn mean_consistent(&self) -> bool {
        (self.mean - self.expected).abs() <= 4.0 * self.stderr
    }
}

/// Draws `trials ≥ 100` Gaussian vectors and records `‖V_{k,⊥}ᵀx‖²`.
pub fn gaussian_expectation_mc(v_kp: &Matrix<f64>, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials < 100 {
        return Err(Error::Config(format!("at least 100 trials are required, got {trials}")));
    }
    let n = v_kp.rows();
    let threshold = 10.0 * n as f64;
    let mut rng = substream(seed, 0, Purpose::MonteCarlo);
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        let x = gaussian_matrix(&mut rng, n, 1);
        let y = v_kp.t_matmul(&x);
        samples.push(y.as_slice().iter().map(|v| v * v).sum::<f64>());
    }
    let t = trials as f64;
    let mean = samples.iter().sum::<f64>() / t;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
    Ok(McEstimate {
        trials,
        mean,
        stderr: (var / t).sqrt(),
        expected: v_kp.norm_fro().powi(2),
        markov_frequency: samples.iter().filter(|&&v| v <= threshold).count() as f64 / t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_complement_is_exactly_zero() {
        let est = gaussian_expectation_mc(&Matrix::zeros(5, 0), 100, 1).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.expected, 0.0);
        assert_eq!(est.markov_frequency, 1.0);
    }

    #[test]
    fn too_few_trials() {
        assert!(gaussian_expectation_mc(&Matrix::identity(3), 99, 1).is_err());
    }

    #[test]
    fn identity_complement() {
        let est = gaussian_expectation_mc(&Matrix::identity(4), 4000, 2).unwrap();
        assert_eq!(est.expected, 4.0);
        assert!(est.mean_consistent(), "{est:?}");
    }
}
