//! Time-axis scheme for `∫₀^∞ E|Z_t - (1-e^{-2t})Id|² / (16 sinh⁴ t) dt`.
//!
//! * `[0, t₁]`: the integrand is evaluated in its Hessian form
//!   `∫ P_tf |Hess log P_tf|² dγ`, which has no `0/0` at `t = 0`.
//! * `[t₁, T]`: MMSE form, adaptive in `s = e^{-2t}`.
//! * `[T, ∞)`: bounded by `integrand(T)·e^{-4(t-T)}`, integrated analytically
//!   and charged to the error budget.

use serde::{Deserialize, Serialize};

use super::rules::adaptive_gk15;
use super::{Estimate, QuadratureConfig};
use crate::density::RelativeDensity;
use crate::{ou, Error, Result};

const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeQuadrature {
    /// Split point `t₁` between the Hessian and MMSE forms.
    pub t_split: f64,
    /// Truncation time `T`.
    pub t_max: f64,
    /// Absolute and relative tolerance of the adaptive rules.
    pub tol: f64,
}

impl Default for TimeQuadrature {
    fn default() -> Self {
        Self { t_split: 0.05, t_max: 12.0, tol: 1e-9 }
    }
}

impl TimeQuadrature {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_split > 0.0 && self.t_split < self.t_max && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig("need 0 < time split < time max < ∞".into()));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            return Err(Error::InvalidConfig("time tolerance must lie in (0, 1e-2]".into()));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        Self { tol: self.tol / 10.0, ..self.clone() }
    }
}

/// Adaptive integral of a fallible, error-carrying integrand. The integrand's
/// own errors are charged as `max error × interval length`.
pub(crate) fn integrate_checked<F>(mut g: F, a: f64, b: f64, tol: f64) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<Estimate>,
{
    let mut failure = None;
    let mut inner_err: f64 = 0.0;
    let est = adaptive_gk15(
        |x| {
            if failure.is_some() {
                return 0.0;
            }
            match g(x) {
                Ok(v) => {
                    inner_err = inner_err.max(v.error);
                    v.value
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        a,
        b,
        tol,
        tol,
        MAX_PANELS,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let est = est?;
    Ok(Estimate::new(est.value, est.error + inner_err * (b - a).abs()))
}

/// `∫_{t_a}^{t_b} g(t) dt` computed as `∫ g(-ln(s)/2) / (2s) ds` over
/// `s ∈ [e^{-2t_b}, e^{-2t_a}]`.
pub(crate) fn integrate_in_s<F>(mut g: F, t_a: f64, t_b: f64, tol: f64) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<Estimate>,
{
    let s_lo = (-2.0 * t_b).exp();
    let s_hi = (-2.0 * t_a).exp();
    integrate_checked(
        |s| {
            let t = -0.5 * s.ln();
            let v = g(t)?;
            Ok(Estimate::new(v.value / (2.0 * s), v.error / (2.0 * s)))
        },
        s_lo,
        s_hi,
        tol,
    )
}

/// Deficit as the time integral of the conditional-covariance excess.
pub fn deficit_time_integral(d: &RelativeDensity, tq: &TimeQuadrature, cfg: &QuadratureConfig) -> Result<Estimate> {
    tq.validate()?;
    d.mixture("deficit time integral")?;
    let head = integrate_checked(|t| ou::hessian_energy(d, t, cfg), 0.0, tq.t_split, tq.tol)?;
    let mid = integrate_in_s(|t| ou::mmse_integrand(d, t, cfg), tq.t_split, tq.t_max, tq.tol)?;
    let tail = ou::mmse_integrand(d, tq.t_max, cfg)?;
    Ok(Estimate::new(head.value + mid.value, head.error + mid.error + (tail.value + tail.error) / 4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::GaussianMixture;

    #[test]
    fn gamma_integral_vanishes() {
        let d: RelativeDensity = GaussianMixture::standard(1).into();
        let v = deficit_time_integral(&d, &TimeQuadrature::default(), &QuadratureConfig::default()).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.error, 0.0);
    }

    #[test]
    fn gaussian_deficit() {
        let d: RelativeDensity = GaussianMixture::gaussian_1d(0.0, 4.0).unwrap().into();
        let v = deficit_time_integral(&d, &TimeQuadrature::default(), &QuadratureConfig::default()).unwrap();
        let exact = 1.125 - (1.5 - 2f64.ln());
        assert!((v.value - exact).abs() < 1e-8, "{} vs {exact}", v.value);
        assert!(v.error < 1e-7);
    }

    #[test]
    fn bad_split_rejected() {
        let tq = TimeQuadrature { t_split: 20.0, ..Default::default() };
        assert!(tq.validate().is_err());
    }
}
