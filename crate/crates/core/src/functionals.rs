//! Entropy, Fisher information and the logarithmic Sobolev deficit, plus the
//! facts about their evolution along the Ornstein–Uhlenbeck flow.
//!
//! For `dμ = f dγ`: `H(f) = ∫ f log f dγ = E_μ[log f]`,
//! `I(f) = ∫ |∇f|²/f dγ = E_μ|∇log f|²` and `δ(f) = I(f)/2 - H(f)`.
//! Mixture expectations are taken under `μ` in each component's own
//! coordinates, so `log f` is evaluated only where `μ` has mass.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::density::{Backing, RelativeDensity, Tabulated1D};
use crate::linalg::power_iteration;
use crate::numerics::time::{integrate_checked, integrate_in_s};
use crate::numerics::{
    deficit_time_integral, expect_mixture, expect_mixture_vec, Estimate, QuadratureConfig, TimeQuadrature,
};
use crate::ou::{self, evolve_mixture, PosteriorState};
use crate::{Error, Result};

const MAX_DIM: usize = 8;

/// Absolute slack allowed in the Fisher-decay comparison on top of the
/// quadrature errors.
pub const DECAY_TOL: f64 = 1e-10;

fn tabulated_estimate(t: &Tabulated1D, g: impl Fn(f64, f64) -> f64) -> Estimate {
    let ys: Vec<f64> = t.grid().iter().zip(t.values()).map(|(x, p)| g(*x, *p)).collect();
    let simpson = crate::density::simpson_irregular(t.grid(), &ys);
    let trapezoid: f64 = t.grid().windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum();
    Estimate::new(simpson, (simpson - trapezoid).abs())
}

/// `H(f) = ∫ f log f dγ`.
pub fn entropy(d: &RelativeDensity, cfg: &QuadratureConfig) -> Result<Estimate> {
    match d.backing() {
        Backing::Mixture(m) => {
            let eval = m.evaluator();
            expect_mixture(m, cfg, |x| eval.log_relative(x))
        }
        Backing::Tabulated(t) => Ok(tabulated_estimate(t, |x, p| if p > 0.0 { p * t.log_relative(x) } else { 0.0 })),
    }
}

/// `I(f) = ∫ |∇f|²/f dγ`.
pub fn fisher(d: &RelativeDensity, cfg: &QuadratureConfig) -> Result<Estimate> {
    match d.backing() {
        Backing::Mixture(m) => {
            let eval = m.evaluator();
            let n = m.dim();
            expect_mixture(m, cfg, |x| {
                let mut s = [0.0; MAX_DIM];
                eval.score_relative(x, &mut s[..n]);
                s[..n].iter().map(|v| v * v).sum()
            })
        }
        // |∇ log f|² p = (p' + x p)² / p in Lebesgue terms.
        Backing::Tabulated(t) => Ok(tabulated_estimate(t, |x, _| {
            let [p, dp, _] = t.derivatives(x);
            if p > 0.0 {
                (dp + x * p).powi(2) / p
            } else {
                0.0
            }
        })),
    }
}

/// Entropy, Fisher information and deficit with per-field error budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    #[serde(rename = "H")]
    pub entropy: f64,
    #[serde(rename = "I")]
    pub fisher: f64,
    pub deficit: f64,
    pub error_budget: ErrorBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    #[serde(rename = "H")]
    pub entropy: f64,
    #[serde(rename = "I")]
    pub fisher: f64,
    pub deficit: f64,
}

/// `δ(f) = I(f)/2 - H(f)`.
pub fn deficit(d: &RelativeDensity, cfg: &QuadratureConfig) -> Result<FunctionalReport> {
    let h = entropy(d, cfg)?;
    let i = fisher(d, cfg)?;
    let report = FunctionalReport {
        entropy: h.value,
        fisher: i.value,
        deficit: 0.5 * i.value - h.value,
        error_budget: ErrorBudget { entropy: h.error, fisher: i.error, deficit: 0.5 * i.error + h.error },
    };
    if report.deficit < -report.error_budget.deficit - 1e-12 {
        return Err(Error::InequalityViolation {
            what: "logarithmic Sobolev inequality".into(),
            lhs: report.deficit,
            rhs: 0.0,
        });
    }
    Ok(report)
}

/// Deficit through `∫₀^∞ E|Z_t - (1-e^{-2t})Id|² / (16 sinh⁴ t) dt`.
pub fn deficit_via_mmse(d: &RelativeDensity, tq: &TimeQuadrature, cfg: &QuadratureConfig) -> Result<Estimate> {
    deficit_time_integral(d, tq, cfg)
}

/// `I(P_tf)` from the exactly evolved mixture.
pub fn fisher_at(d: &RelativeDensity, t: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidConfig(format!("time must be finite and nonnegative, got {t}")));
    }
    if t == 0.0 {
        return fisher(d, cfg);
    }
    let evolved = evolve_mixture(d.mixture("Fisher information along the flow")?, t);
    fisher(&evolved.into(), cfg)
}

/// `H(P_tf)`.
pub fn entropy_at(d: &RelativeDensity, t: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if t == 0.0 {
        return entropy(d, cfg);
    }
    let evolved = ou::evolve(d, t)?;
    entropy(&evolved.relative(), cfg)
}

/// Two sides of de Bruijn's identity `H(f) = ∫₀^∞ I(P_tf) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeBruijnCheck {
    pub entropy: Estimate,
    pub fisher_integral: Estimate,
    pub discrepancy: f64,
}

/// `∫₀^∞ g(I(P_tf)) dt` over the whole half-line in `s = e^{-2t}`.
fn fisher_time_integral(
    d: &RelativeDensity,
    tq: &TimeQuadrature,
    cfg: &QuadratureConfig,
    g: impl Fn(f64) -> f64,
) -> Result<Estimate> {
    d.mixture("time integral of the Fisher information")?;
    // I(P_tf) <= e^{-2t} I(f), so the integrand is bounded by I(f)/2 near s = 0.
    integrate_checked(
        |s| {
            let t = -0.5 * s.ln();
            let i = fisher_at(d, t, cfg)?;
            Ok(Estimate::new(g(i.value) / (2.0 * s), (g(i.value + i.error) - g(i.value)).abs() / (2.0 * s)))
        },
        0.0,
        1.0,
        tq.tol,
    )
}

pub fn debruijn_check(d: &RelativeDensity, tq: &TimeQuadrature, cfg: &QuadratureConfig) -> Result<DeBruijnCheck> {
    let h = entropy(d, cfg)?;
    let integral = fisher_time_integral(d, tq, cfg, |i| i)?;
    Ok(DeBruijnCheck { entropy: h, fisher_integral: integral, discrepancy: (h.value - integral.value).abs() })
}

/// `∫₀^∞ I(P_tf)² dt`.
pub fn fisher_squared_integral(d: &RelativeDensity, tq: &TimeQuadrature, cfg: &QuadratureConfig) -> Result<Estimate> {
    fisher_time_integral(d, tq, cfg, |i| i * i)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub t: f64,
    pub fisher_t: f64,
    /// `e^{-2t} I(f)`.
    pub bound: f64,
    pub error: f64,
}

/// Checks `I(P_tf) <= e^{-2t} I(f)` at each time.
pub fn fisher_decay_check(d: &RelativeDensity, ts: &[f64], cfg: &QuadratureConfig) -> Result<Vec<DecayPoint>> {
    let i0 = fisher(d, cfg)?;
    ts.iter()
        .map(|&t| {
            let it = fisher_at(d, t, cfg)?;
            let decay = (-2.0 * t).exp();
            let point =
                DecayPoint { t, fisher_t: it.value, bound: decay * i0.value, error: it.error + decay * i0.error };
            if point.fisher_t > point.bound + point.error + DECAY_TOL {
                return Err(Error::InequalityViolation {
                    what: format!("Fisher information decay at t = {t}"),
                    lhs: point.fisher_t,
                    rhs: point.bound,
                });
            }
            Ok(point)
        })
        .collect()
}

/// `ρ(t) = sup_{|α|=1} E[(E(α·X | X_t))²]`, the top eigenvalue of
/// `E[u(X_t) u(X_t)ᵀ]`.
pub fn rho(d: &RelativeDensity, t: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    d.require_centered("ρ(t)")?;
    let post = PosteriorState::new(d.mixture("ρ(t)")?, t)?;
    let n = post.dim();
    let m = expect_mixture_vec(post.evolved(), cfg, n * n, |x, out| {
        let mut u = [0.0; MAX_DIM];
        post.conditional_mean(x, &mut u[..n]);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = u[i] * u[j];
            }
        }
    })?;
    let mat = DMatrix::from_fn(n, n, |i, j| m[i * n + j].value);
    let err: f64 = m.iter().map(|e| e.error).sum();
    Ok(Estimate::new(power_iteration(&mat, 1e-10), err))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledFisherCheck {
    /// `(t, e^{2t} I(P_tf))`.
    pub points: Vec<(f64, f64)>,
    pub initial_fisher: f64,
    /// Whether the last value is below `1e-3·I(f)`.
    pub below_threshold: bool,
}

/// `t ↦ e^{2t} I(P_tf)` for a centered density. The sequence is
/// nonincreasing (its derivative is `-2e^{2t}∫P_tf|Hess log P_tf|²dγ`);
/// an increase beyond the error budget is reported as a violation.
pub fn scaled_fisher_limit_check(d: &RelativeDensity, ts: &[f64], cfg: &QuadratureConfig) -> Result<ScaledFisherCheck> {
    d.require_centered("the scaled Fisher limit")?;
    let i0 = fisher(d, cfg)?;
    let mut points = Vec::with_capacity(ts.len());
    let mut prev: Option<(f64, f64, f64)> = None;
    for &t in ts {
        let it = fisher_at(d, t, cfg)?;
        let scale = (2.0 * t).exp();
        let (v, e) = (scale * it.value, scale * it.error);
        if let Some((pt, pv, pe)) = prev {
            if t > pt && v > pv + pe + e + DECAY_TOL * scale {
                return Err(Error::InequalityViolation {
                    what: format!("monotonicity of e^(2t) I(P_t f) between t = {pt} and t = {t}"),
                    lhs: v,
                    rhs: pv,
                });
            }
        }
        prev = Some((t, v, e));
        points.push((t, v));
    }
    let below_threshold = points.last().is_some_and(|(_, v)| *v < 1e-3 * i0.value.max(f64::MIN_POSITIVE));
    Ok(ScaledFisherCheck { points, initial_fisher: i0.value, below_threshold })
}

/// Finite-difference check of `d/dt I(P_tf) = -2∫P_tf|Hess log P_tf|²dγ - 2I(P_tf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gamma2Check {
    pub t: f64,
    pub finite_difference: f64,
    pub rhs: f64,
    pub relative_error: f64,
}

pub fn gamma2_check(d: &RelativeDensity, t: f64, h: f64, cfg: &QuadratureConfig) -> Result<Gamma2Check> {
    if t <= h {
        return Err(Error::InvalidConfig("central difference needs t > h".into()));
    }
    let plus = fisher_at(d, t + h, cfg)?.value;
    let minus = fisher_at(d, t - h, cfg)?.value;
    let fd = (plus - minus) / (2.0 * h);
    let rhs = -2.0 * ou::hessian_energy(d, t, cfg)?.value - 2.0 * fisher_at(d, t, cfg)?.value;
    let relative_error = if rhs == 0.0 { fd.abs() } else { ((fd - rhs) / rhs).abs() };
    Ok(Gamma2Check { t, finite_difference: fd, rhs, relative_error })
}

/// `I(P_tf)` integrated over `[t_a, t_b]` (helper for flow diagnostics).
pub fn fisher_integral_between(
    d: &RelativeDensity,
    t_a: f64,
    t_b: f64,
    tol: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    integrate_in_s(|t| fisher_at(d, t, cfg), t_a, t_b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_extremal, GaussianMixture};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn gauss(var: f64) -> RelativeDensity {
        GaussianMixture::gaussian_1d(0.0, var).unwrap().into()
    }

    /// `H = ½(tr Σ + |m|² - n - log det Σ)`, `I = tr(Σ - 2Id + Σ^{-1}) + |m|²`.
    fn gaussian_oracle(mean: &[f64], cov: &DMatrix<f64>) -> (f64, f64) {
        let n = mean.len() as f64;
        let m2: f64 = mean.iter().map(|v| v * v).sum();
        let inv = cov.clone().try_inverse().unwrap();
        let h = 0.5 * (cov.trace() + m2 - n - cov.determinant().ln());
        let i = cov.trace() - 2.0 * n + inv.trace() + m2;
        (h, i)
    }

    #[test]
    fn gaussian_closed_forms() {
        let r = deficit(&gauss(4.0), &cfg()).unwrap();
        assert!((r.entropy - 0.806_852_819_440_054_7).abs() < 1e-12);
        assert!((r.fisher - 2.25).abs() < 1e-12);
        assert!((r.deficit - 0.318_147_180_559_945_3).abs() < 1e-12);
        let r = deficit(&gauss(0.5), &cfg()).unwrap();
        assert!((r.deficit - (0.25 - 0.096_573_590_279_972_65)).abs() < 1e-12);
        let cov = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, 0.4, 0.7]);
        let d: RelativeDensity =
            GaussianMixture::gaussian(nalgebra::DVector::from_vec(vec![0.3, -0.2]), cov.clone()).unwrap().into();
        let (h, i) = gaussian_oracle(&[0.3, -0.2], &cov);
        let r = deficit(&d, &cfg()).unwrap();
        assert!((r.entropy - h).abs() < 1e-11 && (r.fisher - i).abs() < 1e-11);
    }

    #[test]
    fn extremals_saturate() {
        for b in [vec![0.0], vec![1.0], vec![2.0, -1.0]] {
            let r = deficit(&make_extremal(&b), &cfg()).unwrap();
            assert!(r.deficit.abs() < 1e-12, "{b:?}: {}", r.deficit);
        }
        let r = deficit(&make_extremal(&[1.0]), &cfg()).unwrap();
        assert!((r.entropy - 0.5).abs() < 1e-12 && (r.fisher - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tabulated_matches_mixture() {
        let mix = crate::corpus::by_name("bimodal").unwrap().density;
        let m = mix.as_mixture().unwrap().evaluator();
        let t = Tabulated1D::from_fn(-12.0, 12.0, 4801, |x| m.log_density(&[x]).exp()).unwrap();
        let a = deficit(&mix, &cfg()).unwrap();
        let b = deficit(&t.into(), &cfg()).unwrap();
        assert!((a.entropy - b.entropy).abs() < 1e-6, "{} {}", a.entropy, b.entropy);
        assert!((a.fisher - b.fisher).abs() < 1e-5, "{} {}", a.fisher, b.fisher);
    }

    #[test]
    fn debruijn_gaussian() {
        let c = debruijn_check(&gauss(4.0), &TimeQuadrature::default(), &cfg()).unwrap();
        assert!(c.discrepancy < 1e-8, "{c:?}");
        let c = debruijn_check(&make_extremal(&[1.0]), &TimeQuadrature::default(), &cfg()).unwrap();
        assert!((c.fisher_integral.value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn decay_and_rho() {
        let t = 3f64.ln() / 2.0;
        let p = fisher_decay_check(&gauss(4.0), &[t], &cfg()).unwrap();
        assert!((p[0].fisher_t - 0.5).abs() < 1e-12 && (p[0].bound - 0.75).abs() < 1e-12);
        let p = fisher_decay_check(&make_extremal(&[1.0]), &[1.0], &cfg()).unwrap();
        assert!((p[0].fisher_t - p[0].bound).abs() < 1e-12);
        assert!((rho(&gauss(4.0), t, &cfg()).unwrap().value - 8.0 / 3.0).abs() < 1e-10);
        assert!((rho(&gauss(1.0), t, &cfg()).unwrap().value - 1.0 / 3.0).abs() < 1e-10);
        assert!(matches!(rho(&make_extremal(&[1.0]), t, &cfg()), Err(Error::Precondition(_))));
    }

    #[test]
    fn scaled_fisher() {
        let t = 3f64.ln() / 2.0;
        let c = scaled_fisher_limit_check(&gauss(4.0), &[t], &cfg()).unwrap();
        assert!((c.points[0].1 - 1.5).abs() < 1e-12);
        assert!(scaled_fisher_limit_check(&make_extremal(&[1.0]), &[t], &cfg()).is_err());
    }

    #[test]
    fn gamma2_ode() {
        let d = crate::corpus::by_name("asym3").unwrap().density;
        let c = gamma2_check(&d, 0.2, 1e-4, &cfg()).unwrap();
        assert!(c.relative_error < 1e-6, "{c:?}");
    }
}
