//! Wasserstein-2 distances: the quantile coupling in one dimension, the
//! Gaussian closed form, and the flow `w(t) = W2(μ, μ_t)`.
//!
//! One-dimensional integrals over `q ∈ (0, 1)` are written in Gaussian
//! coordinates `q = Φ(z)`, so `W2² = ∫ (Q_a(Φ(z)) - Q_b(Φ(z)))² φ(z) dz` and
//! the tails of the quantile functions never meet `q ∈ {0, 1}`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::density::{Backing, GaussianMixture, RelativeDensity, Tabulated1D};
use crate::linalg::sqrt_spd;
use crate::numerics::rules::adaptive_gk15;
use crate::numerics::{Estimate, QuadratureConfig};
use crate::ou::evolve_mixture;
use crate::{functionals, Error, Result};

const Z_RANGE: f64 = 12.0;
const QUANTILE_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum W2Method {
    #[serde(rename = "quantile-1d")]
    Quantile1d,
    GaussianClosedForm,
    FlowGrid,
    /// Gelbrich bound: `W2` between Gaussians with the same first two moments.
    /// A lower bound on the true distance.
    MomentLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct W2Result {
    pub value: f64,
    pub method: W2Method,
    pub error: f64,
}

/// Lower (`F`) and upper (`1 - F`) tail probabilities of a 1-D law, each
/// accurate in its own tail.
trait Cdf1D {
    fn lower(&self, x: f64) -> f64;
    fn upper(&self, x: f64) -> f64;
    /// Bracket guaranteed to contain every quantile used.
    fn bracket(&self) -> (f64, f64);
}

struct MixtureCdf(Vec<(f64, f64, f64)>);

impl MixtureCdf {
    fn new(mix: &GaussianMixture) -> Self {
        Self(mix.components().iter().map(|c| (c.weight(), c.mean()[0], c.cov()[(0, 0)].sqrt())).collect())
    }
}

impl Cdf1D for MixtureCdf {
    fn lower(&self, x: f64) -> f64 {
        self.0.iter().map(|&(w, m, s)| w * 0.5 * erfc(-(x - m) / (s * SQRT_2))).sum()
    }

    fn upper(&self, x: f64) -> f64 {
        self.0.iter().map(|&(w, m, s)| w * 0.5 * erfc((x - m) / (s * SQRT_2))).sum()
    }

    fn bracket(&self) -> (f64, f64) {
        let lo = self.0.iter().map(|&(_, m, s)| m - 2.0 * Z_RANGE * s).fold(f64::INFINITY, f64::min);
        let hi = self.0.iter().map(|&(_, m, s)| m + 2.0 * Z_RANGE * s).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

struct TabulatedCdf<'a>(&'a Tabulated1D, f64);

impl Cdf1D for TabulatedCdf<'_> {
    fn lower(&self, x: f64) -> f64 {
        self.0.cumulative(x) / self.1
    }

    fn upper(&self, x: f64) -> f64 {
        1.0 - self.0.cumulative(x) / self.1
    }

    fn bracket(&self) -> (f64, f64) {
        self.0.support()
    }
}

/// `Φ(z)` and `1 - Φ(z)`.
fn gauss_tails(z: f64) -> (f64, f64) {
    (0.5 * erfc(-z / SQRT_2), 0.5 * erfc(z / SQRT_2))
}

/// Quantile at `q = Φ(z)`: for `z <= 0` solves `F(x) = Φ(z)`, otherwise
/// `1 - F(x) = Φ(-z)`, by bisection to `1e-12` in `x`.
fn quantile_at(cdf: &dyn Cdf1D, z: f64) -> f64 {
    let (lo_q, hi_q) = gauss_tails(z);
    let (mut lo, mut hi) = cdf.bracket();
    while hi - lo > QUANTILE_TOL * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        let below = if z <= 0.0 { cdf.lower(mid) < lo_q } else { cdf.upper(mid) > hi_q };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `(∫ (Q_a - Q_b)² dq)^{1/2}` with `Q_b` the standard Gaussian quantile when
/// `b` is `None`.
fn quantile_w2(a: &dyn Cdf1D, b: Option<&dyn Cdf1D>, tol: f64) -> Result<Estimate> {
    let sq = adaptive_gk15(
        |z| {
            let qa = quantile_at(a, z);
            let qb = b.map_or(z, |b| quantile_at(b, z));
            (qa - qb).powi(2) * phi(z)
        },
        -Z_RANGE,
        Z_RANGE,
        tol,
        tol,
        MAX_PANELS,
    )?;
    let value = sq.value.max(0.0).sqrt();
    let error = if value > 0.0 { (sq.error / (2.0 * value)).min(sq.error.sqrt()) } else { sq.error.sqrt() };
    Ok(Estimate::new(value, error))
}

fn cdf_of(d: &RelativeDensity) -> Result<Box<dyn Cdf1D + '_>> {
    if d.dim() != 1 {
        return Err(Error::UnsupportedFamily("one-dimensional W2"));
    }
    Ok(match d.backing() {
        Backing::Mixture(m) => Box::new(MixtureCdf::new(m)),
        Backing::Tabulated(t) => Box::new(TabulatedCdf(t, t.spline_mass())),
    })
}

/// `W2(μ, γ)` in one dimension by the quantile coupling.
pub fn w2_1d(d: &RelativeDensity, cfg: &QuadratureConfig) -> Result<W2Result> {
    let cdf = cdf_of(d)?;
    let e = quantile_w2(cdf.as_ref(), None, cfg.tol)?;
    Ok(W2Result { value: e.value, method: W2Method::Quantile1d, error: e.error })
}

/// `W2(N(m, Σ), γ) = (|m|² + tr(Σ + Id - 2Σ^{1/2}))^{1/2}`.
pub fn w2_gaussian(m: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<W2Result> {
    let n = m.len();
    if sigma.nrows() != n || sigma.ncols() != n {
        return Err(Error::InvalidDensity("mean and covariance dimensions differ".into()));
    }
    if crate::linalg::min_eigenvalue(sigma) <= 0.0 {
        return Err(Error::InvalidDensity("covariance is not positive definite".into()));
    }
    let root = sqrt_spd(sigma);
    let sq = m.norm_squared() + (sigma + DMatrix::identity(n, n) - root * 2.0).trace();
    Ok(W2Result { value: sq.max(0.0).sqrt(), method: W2Method::GaussianClosedForm, error: 0.0 })
}

/// `W2(μ, γ)` by the best available route: quantile coupling in 1-D, the
/// closed form for Gaussians, and otherwise the moment (Gelbrich) lower bound.
pub fn w2_to_gamma(d: &RelativeDensity, cfg: &QuadratureConfig) -> Result<W2Result> {
    if d.dim() == 1 {
        return w2_1d(d, cfg);
    }
    let (b, cov) = (d.barycenter(), d.covariance());
    let mut r = w2_gaussian(b, cov)?;
    if !d.as_mixture().is_some_and(|m| m.is_single_gaussian()) {
        r.method = W2Method::MomentLowerBound;
    }
    Ok(r)
}

/// `W2` between two one-dimensional mixtures.
pub fn w2_between(a: &GaussianMixture, b: &GaussianMixture, cfg: &QuadratureConfig) -> Result<W2Result> {
    if a.dim() != 1 || b.dim() != 1 {
        return Err(Error::UnsupportedFamily("one-dimensional W2 between mixtures"));
    }
    let e = quantile_w2(&MixtureCdf::new(a), Some(&MixtureCdf::new(b)), cfg.tol)?;
    Ok(W2Result { value: e.value, method: W2Method::Quantile1d, error: e.error })
}

/// `w(t) = W2(μ, μ_t)` at each grid time.
pub fn w2_flow(d: &RelativeDensity, ts: &[f64], cfg: &QuadratureConfig) -> Result<Vec<(f64, W2Result)>> {
    let mix = d.mixture("W2 flow")?;
    if mix.dim() != 1 {
        return Err(Error::UnsupportedFamily("W2 flow in dimension n >= 2"));
    }
    ts.iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok((t, W2Result { value: 0.0, method: W2Method::FlowGrid, error: 0.0 }));
            }
            let mut r = w2_between(mix, &evolve_mixture(mix, t), cfg)?;
            r.method = W2Method::FlowGrid;
            Ok((t, r))
        })
        .collect()
}

/// Talagrand: `2H(f) >= W2(μ, γ)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TalagrandCheck {
    pub two_entropy: f64,
    pub w2_squared: f64,
    pub error_budget: f64,
}

impl TalagrandCheck {
    pub fn holds(&self) -> bool {
        self.two_entropy - self.w2_squared >= -self.error_budget
    }
}

pub fn talagrand_check(d: &RelativeDensity, cfg: &QuadratureConfig) -> Result<TalagrandCheck> {
    let h = functionals::entropy(d, cfg)?;
    let w = w2_to_gamma(d, cfg)?;
    Ok(TalagrandCheck {
        two_entropy: 2.0 * h.value,
        w2_squared: w.value * w.value,
        error_budget: 2.0 * h.error + 2.0 * w.value * w.error + 1e-12,
    })
}

/// Flow diagnostics at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowChainPoint {
    pub t: f64,
    /// `W2(μ, μ_t)`.
    pub w: f64,
    /// `W2(μ_t, γ)²`.
    pub w2_to_gamma_sq: f64,
    pub two_entropy: f64,
    pub fisher: f64,
    /// `(w(t+h) - w(t))/h`.
    pub slope: f64,
    pub error_budget: f64,
}

impl FlowChainPoint {
    /// `W2(μ_t, γ)² <= 2H(P_tf) <= I(P_tf)`.
    pub fn chain_holds(&self) -> bool {
        self.w2_to_gamma_sq <= self.two_entropy + self.error_budget
            && self.two_entropy <= self.fisher + self.error_budget
    }

    /// `(w(t+h) - w(t))/h <= √I(P_tf)`.
    pub fn slope_holds(&self, tol: f64) -> bool {
        self.slope <= self.fisher.sqrt() + tol
    }
}

/// Transport-entropy-information chain along the flow. The transport term
/// is `W2(μ_t, γ)`: Talagrand's inequality applied to `μ_t` controls the
/// distance from `μ_t` to `γ`, not from `μ` to `μ_t`.
pub fn flow_chain(d: &RelativeDensity, ts: &[f64], h: f64, cfg: &QuadratureConfig) -> Result<Vec<FlowChainPoint>> {
    let mix = d.mixture("flow chain")?;
    if mix.dim() != 1 {
        return Err(Error::UnsupportedFamily("flow chain in dimension n >= 2"));
    }
    ts.iter()
        .map(|&t| {
            let now = w2_flow(d, &[t, t + h], cfg)?;
            let evolved: RelativeDensity = evolve_mixture(mix, t).into();
            let to_gamma = w2_1d(&evolved, cfg)?;
            let hh = functionals::entropy(&evolved, cfg)?;
            let ii = functionals::fisher(&evolved, cfg)?;
            Ok(FlowChainPoint {
                t,
                w: now[0].1.value,
                w2_to_gamma_sq: to_gamma.value.powi(2),
                two_entropy: 2.0 * hh.value,
                fisher: ii.value,
                slope: (now[1].1.value - now[0].1.value) / h,
                error_budget: 2.0 * to_gamma.value * to_gamma.error + 2.0 * hh.error + ii.error + 1e-12,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(var: f64) -> RelativeDensity {
        GaussianMixture::gaussian_1d(0.0, var).unwrap().into()
    }

    #[test]
    fn gaussian_values() {
        let cfg = QuadratureConfig::default();
        assert!(w2_1d(&gauss(1.0), &cfg).unwrap().value < 1e-6);
        assert!((w2_1d(&gauss(4.0), &cfg).unwrap().value - 1.0).abs() < 1e-9);
        assert!((w2_1d(&gauss(0.5), &cfg).unwrap().value - (1.0 - 0.5f64.sqrt())).abs() < 1e-9);
        let one = DMatrix::identity(1, 1);
        assert!((w2_gaussian(&DVector::from_vec(vec![1.0]), &one).unwrap().value - 1.0).abs() < 1e-15);
        assert!((w2_gaussian(&DVector::zeros(1), &(one * 4.0)).unwrap().value - 1.0).abs() < 1e-15);
        assert_eq!(w2_gaussian(&DVector::zeros(2), &DMatrix::identity(2, 2)).unwrap().value, 0.0);
    }

    #[test]
    fn shifted_gaussian_matches_closed_form() {
        let cfg = QuadratureConfig::default();
        let d: RelativeDensity = GaussianMixture::gaussian_1d(0.7, 0.8).unwrap().into();
        let exact = (0.49 + (0.8f64.sqrt() - 1.0).powi(2)).sqrt();
        assert!((w2_1d(&d, &cfg).unwrap().value - exact).abs() < 1e-9);
    }

    #[test]
    fn flow_of_gaussian() {
        let cfg = QuadratureConfig::default();
        let t = 3f64.ln() / 2.0;
        let w = w2_flow(&gauss(4.0), &[0.0, t], &cfg).unwrap();
        assert_eq!(w[0].1.value, 0.0);
        assert!((w[1].1.value - (2.0 - 2f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn flow_chain_gaussian() {
        let cfg = QuadratureConfig::default();
        for p in flow_chain(&gauss(4.0), &[0.1, 0.5, 2.0], 1e-3, &cfg).unwrap() {
            assert!(p.chain_holds(), "{p:?}");
            assert!(p.slope_holds(1e-7), "{p:?}");
        }
    }
}
