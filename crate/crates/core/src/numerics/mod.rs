//! Quadrature engines.
//!
//! * [`integrate_gamma`]: Gauss–Hermite integration against `γ` (tensor rule in
//!   one and two dimensions, stratified Monte Carlo beyond).
//! * [`expect_mixture`]: expectations under a Gaussian mixture, integrating
//!   each component in its own affine coordinates.
//! * [`rules::adaptive_gk15`]: adaptive Gauss–Kronrod for time and quantile
//!   integrals.
//! * [`time`]: the split time-axis scheme for the deficit integral.

mod expect;
pub mod rules;
pub mod time;

use serde::{Deserialize, Serialize};

pub use expect::{expect_mixture, expect_mixture_vec, integrate_gamma, NodeSet};
pub use time::{deficit_time_integral, TimeQuadrature};

use crate::{Error, Result};

/// A value together with an estimate of its absolute numerical error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }
}

/// Quadrature settings shared by every module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss–Hermite order for one-dimensional integrals.
    pub gh_order_1d: usize,
    /// Per-axis Gauss–Hermite order of the two-dimensional tensor rule.
    pub gh_order_2d: usize,
    /// Target absolute tolerance of adaptive rules.
    pub tol: f64,
    /// Monte Carlo sample count for dimension three and above.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { gh_order_1d: 128, gh_order_2d: 128, tol: 1e-9, mc_samples: 1_000_000, seed: 0x5eed_1d0c }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gh_order_1d < 8 || self.gh_order_2d < 8 {
            return Err(Error::InvalidConfig("Gauss-Hermite orders must be at least 8".into()));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            return Err(Error::InvalidConfig("tolerance must lie in (0, 1e-2]".into()));
        }
        if self.mc_samples < 1000 {
            return Err(Error::InvalidConfig("at least 1000 Monte Carlo samples".into()));
        }
        Ok(())
    }

    /// Per-axis Gauss–Hermite order for the given dimension, `None` when the
    /// dimension is handled by Monte Carlo.
    pub fn gh_order(&self, dim: usize) -> Option<usize> {
        match dim {
            1 => Some(self.gh_order_1d),
            2 => Some(self.gh_order_2d),
            _ => None,
        }
    }

    /// Largest order-doubling discrepancy accepted for a Gauss–Hermite value.
    /// The discrepancy bounds the error of the coarser rule, so the finer rule
    /// is trusted well below it.
    pub(crate) fn accepted_gh_error(&self, value: f64) -> f64 {
        self.tol.sqrt() * value.abs().max(1.0)
    }

    /// Same configuration with every quadrature order doubled.
    pub fn refined(&self) -> Self {
        Self {
            gh_order_1d: self.gh_order_1d * 2,
            gh_order_2d: self.gh_order_2d * 2,
            tol: self.tol / 10.0,
            mc_samples: self.mc_samples * 2,
            seed: self.seed,
        }
    }
}

/// Pairwise (cascade) summation; deterministic for a fixed input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = QuadratureConfig { gh_order_1d: 4, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig { tol: 0.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&v), v.iter().sum::<f64>());
    }
}
