//! Exact Ornstein–Uhlenbeck evolution of Gaussian mixtures and the posterior
//! machinery `E(X | X_t)`, `Cov(X | X_t)`.
//!
//! With `X_t = e^{-t}X + √(1-e^{-2t}) N`, a component `N(m, Σ)` of `μ` is
//! carried to `N(e^{-t}m, S)` with `S = e^{-2t}Σ + (1-e^{-2t})Id`, so the law
//! `P_tf dγ` of `X_t` is again a mixture. Conditioning `X` on `X_t = x` is
//! Gaussian within each component; mixing over the posterior component
//! probabilities gives the conditional mean `u(x)` and covariance `Z_t(x)`.

use nalgebra::{DMatrix, DVector};

use crate::density::{Component, GaussianMixture, MixtureEval, RelativeDensity};
use crate::linalg::{frobenius_sq, matvec, to_flat};
use crate::numerics::{expect_mixture, Estimate, QuadratureConfig};
use crate::{Error, Result};

const MAX_DIM: usize = 8;

/// A base mixture together with its exact image under `P_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedDensity {
    pub base: GaussianMixture,
    pub t: f64,
    pub evolved: GaussianMixture,
}

impl EvolvedDensity {
    pub fn relative(&self) -> RelativeDensity {
        self.evolved.clone().into()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("time must be finite and nonnegative, got {t}")))
    }
}

/// Law of `X_t` when `X ~ mix`: means `e^{-t}m_k`, covariances
/// `Id + e^{-2t}(Σ_k - Id)`.
pub fn evolve_mixture(mix: &GaussianMixture, t: f64) -> GaussianMixture {
    if t == 0.0 {
        return mix.clone();
    }
    let decay = (-t).exp();
    let decay2 = (-2.0 * t).exp();
    let n = mix.dim();
    let comps = mix
        .components()
        .iter()
        .map(|c| {
            let cov_dev = c.cov_dev() * decay2;
            let cov = DMatrix::identity(n, n) + &cov_dev;
            Component::from_parts(c.weight(), c.mean() * decay, cov, cov_dev)
        })
        .collect();
    GaussianMixture::from_components_unchecked(n, comps)
}

pub fn evolve(d: &RelativeDensity, t: f64) -> Result<EvolvedDensity> {
    check_time(t)?;
    let base = d.mixture("OU evolution")?.clone();
    let evolved = evolve_mixture(&base, t);
    Ok(EvolvedDensity { base, t, evolved })
}

#[derive(Debug, Clone)]
struct PosteriorComponent {
    mean: Vec<f64>,
    /// `e^{-t}Σ S^{-1}`: `E(X | X_t = x, k) = m + gain (x - e^{-t}m)`.
    gain: Vec<f64>,
    /// `Cov(X | X_t, k) = (1-e^{-2t}) Σ S^{-1}`.
    cond_cov: Vec<f64>,
    /// `(Σ - Id) S^{-1}`, so that `Cov(X | X_t, k) - (1-e^{-2t})Id` is
    /// `(1-e^{-2t})²` times it.
    dev_s_inv: Vec<f64>,
    /// `S^{-1} m`.
    s_inv_mean: Vec<f64>,
    /// `S^{-1}(Σ - Id)`.
    s_inv_dev: Vec<f64>,
}

/// Posterior of `X` given `X_t` for a mixture `X`, at a fixed `t > 0`.
#[derive(Debug, Clone)]
pub struct PosteriorState {
    t: f64,
    dim: usize,
    decay: f64,
    /// `1 - e^{-2t}`.
    a: f64,
    evolved: GaussianMixture,
    eval: MixtureEval,
    comps: Vec<PosteriorComponent>,
}

impl PosteriorState {
    pub fn new(mix: &GaussianMixture, t: f64) -> Result<Self> {
        check_time(t)?;
        if t == 0.0 {
            return Err(Error::DegenerateConditioning);
        }
        let n = mix.dim();
        let decay = (-t).exp();
        let a = -(-2.0 * t).exp_m1();
        let evolved = evolve_mixture(mix, t);
        let comps = mix
            .components()
            .iter()
            .zip(evolved.components())
            .map(|(c, e)| {
                let s_inv = nalgebra::Cholesky::new(e.cov().clone())
                    .expect("evolved covariances are positive definite")
                    .inverse();
                let sigma_s_inv = c.cov() * &s_inv;
                // Σ and S commute, so these products are symmetric up to rounding.
                let sym = |m: DMatrix<f64>| to_flat(&((&m + m.transpose()) * 0.5));
                PosteriorComponent {
                    mean: c.mean().iter().copied().collect(),
                    gain: sym(&sigma_s_inv * decay),
                    cond_cov: sym(&sigma_s_inv * a),
                    dev_s_inv: sym(c.cov_dev() * &s_inv),
                    s_inv_mean: (&s_inv * c.mean()).iter().copied().collect(),
                    s_inv_dev: sym(&s_inv * c.cov_dev()),
                }
            })
            .collect();
        let eval = evolved.evaluator();
        Ok(Self { t, dim: n, decay, a, evolved, eval, comps })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Law of `X_t`.
    pub fn evolved(&self) -> &GaussianMixture {
        &self.evolved
    }

    /// Posterior component probabilities `r_k(x)` given `X_t = x`.
    pub fn responsibilities(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.comps.len()];
        self.eval.responsibilities(x, &mut r);
        r
    }

    /// Per-component conditional means `m_k + e^{-t}Σ_k S_k^{-1}(x - e^{-t}m_k)`.
    fn component_means(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        let mut d = [0.0; MAX_DIM];
        for (k, c) in self.comps.iter().enumerate() {
            for i in 0..n {
                d[i] = x[i] - self.decay * c.mean[i];
            }
            let row = &mut out[k * n..(k + 1) * n];
            matvec(&c.gain, n, &d[..n], row);
            for (r, m) in row.iter_mut().zip(c.mean.iter()) {
                *r += m;
            }
        }
    }

    /// `u(x) = E(X | X_t = x)`.
    pub fn conditional_mean(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        let r = self.responsibilities(x);
        let mut means = vec![0.0; self.comps.len() * n];
        self.component_means(x, &mut means);
        out[..n].iter_mut().for_each(|v| *v = 0.0);
        for (k, rk) in r.iter().enumerate() {
            for i in 0..n {
                out[i] += rk * means[k * n + i];
            }
        }
    }

    /// `Z_t(x) = Cov(X | X_t = x)` by the law of total variance, row-major.
    pub fn conditional_cov(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        let r = self.responsibilities(x);
        let mut means = vec![0.0; self.comps.len() * n];
        self.component_means(x, &mut means);
        let mut bar = [0.0; MAX_DIM];
        for (k, rk) in r.iter().enumerate() {
            for i in 0..n {
                bar[i] += rk * means[k * n + i];
            }
        }
        out[..n * n].iter_mut().for_each(|v| *v = 0.0);
        for (k, c) in self.comps.iter().enumerate() {
            let rk = r[k];
            for i in 0..n {
                let di = means[k * n + i] - bar[i];
                for j in 0..n {
                    let dj = means[k * n + j] - bar[j];
                    out[i * n + j] += rk * (c.cond_cov[i * n + j] + di * dj);
                }
            }
        }
    }

    /// `(Z_t(x) - (1-e^{-2t})Id) / (1-e^{-2t})²`, free of cancellation.
    ///
    /// Within a component, `Cov - a Id = a²(Σ - Id)S^{-1}`; the conditional
    /// means differ from `e^{-t}x` by `a S^{-1}(m + e^{-t}(Σ - Id)x)`, and the
    /// spread of the means is invariant under that common shift.
    pub fn scaled_cov_excess(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        let r = self.responsibilities(x);
        let kc = self.comps.len();
        let mut v = vec![0.0; kc * n];
        let mut bar = [0.0; MAX_DIM];
        for (k, c) in self.comps.iter().enumerate() {
            let row = &mut v[k * n..(k + 1) * n];
            matvec(&c.s_inv_dev, n, x, row);
            for i in 0..n {
                row[i] = c.s_inv_mean[i] + self.decay * row[i];
                bar[i] += r[k] * row[i];
            }
        }
        out[..n * n].iter_mut().for_each(|o| *o = 0.0);
        for (k, c) in self.comps.iter().enumerate() {
            let rk = r[k];
            for i in 0..n {
                let di = v[k * n + i] - bar[i];
                for j in 0..n {
                    let dj = v[k * n + j] - bar[j];
                    out[i * n + j] += rk * (c.dev_s_inv[i * n + j] + di * dj);
                }
            }
        }
    }

    /// `1 - e^{-2t}`.
    pub fn noise_fraction(&self) -> f64 {
        self.a
    }
}

fn posterior(d: &RelativeDensity, t: f64) -> Result<PosteriorState> {
    PosteriorState::new(d.mixture("posterior of X given X_t")?, t)
}

/// `E(X | X_t = x)`.
pub fn conditional_mean(d: &RelativeDensity, t: f64, x: &[f64]) -> Result<DVector<f64>> {
    let post = posterior(d, t)?;
    let mut out = vec![0.0; post.dim()];
    post.conditional_mean(x, &mut out);
    Ok(DVector::from_vec(out))
}

/// `Z_t(x) = Cov(X | X_t = x)`.
pub fn conditional_cov(d: &RelativeDensity, t: f64, x: &[f64]) -> Result<DMatrix<f64>> {
    let post = posterior(d, t)?;
    let n = post.dim();
    let mut out = vec![0.0; n * n];
    post.conditional_cov(x, &mut out);
    Ok(DMatrix::from_row_slice(n, n, &out))
}

/// `E|E(X | X_t) - e^{-t}X_t|²`, the mean-square gap between the Bayes and
/// linear estimators of `X` from `X_t`.
pub fn mmse_fisher(d: &RelativeDensity, t: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    let post = posterior(d, t)?;
    let n = post.dim();
    let decay = (-t).exp();
    expect_mixture(post.evolved(), cfg, |x| {
        let mut u = [0.0; MAX_DIM];
        post.conditional_mean(x, &mut u[..n]);
        (0..n).map(|i| (u[i] - decay * x[i]).powi(2)).sum()
    })
}

/// `∫ P_tf |Hess log P_tf|² dγ`, the deficit integrand in Hessian form.
/// Defined at `t = 0` as well.
pub fn hessian_energy(d: &RelativeDensity, t: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    check_time(t)?;
    let evolved = evolve_mixture(d.mixture("Hessian-form integrand")?, t);
    let n = evolved.dim();
    let eval = evolved.evaluator();
    expect_mixture(&evolved, cfg, |x| {
        let mut h = [0.0; MAX_DIM * MAX_DIM];
        eval.hess_log_relative(x, &mut h[..n * n]);
        frobenius_sq(&h[..n * n])
    })
}

/// `E|Z_t - (1-e^{-2t})Id|²` (Hilbert–Schmidt norm).
pub fn cov_excess_energy(d: &RelativeDensity, t: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    let post = posterior(d, t)?;
    let a2 = post.noise_fraction().powi(2);
    let scaled = scaled_cov_excess_energy(&post, cfg)?;
    Ok(Estimate::new(a2 * a2 * scaled.value, a2 * a2 * scaled.error))
}

fn scaled_cov_excess_energy(post: &PosteriorState, cfg: &QuadratureConfig) -> Result<Estimate> {
    let n = post.dim();
    expect_mixture(post.evolved(), cfg, |x| {
        let mut w = [0.0; MAX_DIM * MAX_DIM];
        post.scaled_cov_excess(x, &mut w[..n * n]);
        frobenius_sq(&w[..n * n])
    })
}

/// `E|Z_t - (1-e^{-2t})Id|² / (16 sinh⁴ t)`, the deficit integrand in MMSE
/// form. Requires `t > 0`.
pub fn mmse_integrand(d: &RelativeDensity, t: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    let post = posterior(d, t)?;
    // (1-e^{-2t})⁴ / (16 sinh⁴ t) = e^{-4t}
    let factor = (-4.0 * t).exp();
    let scaled = scaled_cov_excess_energy(&post, cfg)?;
    Ok(Estimate::new(factor * scaled.value, factor * scaled.error))
}

/// `P_tf(x)` from the evolved mixture.
pub fn pt_f(d: &RelativeDensity, t: f64, x: &[f64]) -> Result<f64> {
    check_time(t)?;
    Ok(evolve_mixture(d.mixture("P_t f")?, t).evaluator().relative(x))
}

/// `P_t(x f)(x) = u(x) P_tf(x)` from the posterior mean.
pub fn pt_xf(d: &RelativeDensity, t: f64, x: &[f64]) -> Result<DVector<f64>> {
    let post = posterior(d, t)?;
    let mut u = vec![0.0; post.dim()];
    post.conditional_mean(x, &mut u);
    let f = post.evolved().evaluator().relative(x);
    Ok(DVector::from_vec(u) * f)
}

/// `∇P_tf(x)` from the evolved mixture.
pub fn grad_pt_f(d: &RelativeDensity, t: f64, x: &[f64]) -> Result<DVector<f64>> {
    check_time(t)?;
    let evolved = evolve_mixture(d.mixture("∇P_t f")?, t);
    let mut g = vec![0.0; evolved.dim()];
    evolved.evaluator().grad_relative(x, &mut g);
    Ok(DVector::from_vec(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_gamma;

    fn n04() -> RelativeDensity {
        GaussianMixture::gaussian_1d(0.0, 4.0).unwrap().into()
    }

    fn t_third() -> f64 {
        3f64.ln() / 2.0
    }

    #[test]
    fn evolve_gaussian() {
        let e = evolve(&n04(), t_third()).unwrap();
        assert!((e.evolved.components()[0].cov()[(0, 0)] - 2.0).abs() < 1e-14);
        let same = evolve(&n04(), 0.0).unwrap();
        assert_eq!(same.evolved, same.base);
        assert!(matches!(evolve(&n04(), -1.0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn long_time_limit_is_gamma() {
        let d: RelativeDensity = crate::corpus::by_name("asym3").unwrap().density;
        let e = evolve(&d, 20.0).unwrap();
        for c in e.evolved.components() {
            assert!(c.mean().norm() < 1e-8);
            assert!(c.cov_dev().norm() < 1e-8);
        }
    }

    #[test]
    fn semigroup_property() {
        let d: RelativeDensity = crate::corpus::by_name("mix2d").unwrap().density;
        let a = evolve_mixture(&evolve_mixture(d.as_mixture().unwrap(), 0.3), 0.7);
        let b = evolve_mixture(d.as_mixture().unwrap(), 1.0);
        for (x, y) in a.components().iter().zip(b.components()) {
            assert!((x.mean() - y.mean()).norm() < 1e-15);
            assert!((x.cov() - y.cov()).norm() < 1e-15);
        }
    }

    #[test]
    fn gaussian_conditioning() {
        let t = t_third();
        let u = conditional_mean(&n04(), t, &[1.0]).unwrap();
        assert!((u[0] - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        let z = conditional_cov(&n04(), t, &[0.3]).unwrap();
        assert!((z[(0, 0)] - 4.0 / 3.0).abs() < 1e-14);
        let g: RelativeDensity = GaussianMixture::standard(2).into();
        let u = conditional_mean(&g, 0.8, &[1.0, -2.0]).unwrap();
        assert!((u[0] - (-0.8f64).exp()).abs() < 1e-15);
        let z = conditional_cov(&g, 0.8, &[1.0, -2.0]).unwrap();
        assert!((z[(0, 0)] + (-1.6f64).exp_m1()).abs() < 1e-15);
        assert!(z[(0, 1)].abs() < 1e-15);
        assert!(matches!(conditional_mean(&g, 0.0, &[0.0, 0.0]), Err(Error::DegenerateConditioning)));
    }

    #[test]
    fn conditional_covariance_is_psd() {
        for name in ["asym3", "mix2d", "mix2d_3"] {
            let d = crate::corpus::by_name(name).unwrap().density;
            for (i, t) in [0.05, 0.4, 2.0].iter().enumerate() {
                for j in 0..30 {
                    let x: Vec<f64> = (0..d.dim()).map(|k| ((i * 31 + j * 7 + k * 3) as f64).sin() * 3.0).collect();
                    let z = conditional_cov(&d, *t, &x).unwrap();
                    assert!(crate::linalg::min_eigenvalue(&z) > -1e-12);
                }
            }
        }
    }

    #[test]
    fn mmse_closed_form() {
        let cfg = QuadratureConfig::default();
        let v = mmse_fisher(&n04(), t_third(), &cfg).unwrap();
        assert!((v.value - 2.0 / 3.0).abs() < 1e-12);
        let g: RelativeDensity = GaussianMixture::standard(1).into();
        assert!(mmse_fisher(&g, 1.0, &cfg).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn integrand_at_third() {
        let cfg = QuadratureConfig::default();
        let v = mmse_integrand(&n04(), t_third(), &cfg).unwrap();
        assert!((v.value - 0.25).abs() < 1e-13);
        let h = hessian_energy(&n04(), t_third(), &cfg).unwrap();
        assert!((h.value - 0.25).abs() < 1e-13);
        let raw = cov_excess_energy(&n04(), t_third(), &cfg).unwrap();
        assert!((raw.value - 4.0 / 9.0).abs() < 1e-13);
    }

    /// `P_t(xf)(x) = ∫ y f(y) ... ` via Gauss–Hermite against the Mehler kernel:
    /// `P_t g(x) = ∫ g(e^{-t}x + √(1-e^{-2t}) y) dγ(y)`.
    #[test]
    fn pt_xf_matches_quadrature() {
        let cfg = QuadratureConfig::default();
        let d = crate::corpus::by_name("asym3").unwrap().density;
        for (t, x) in [(0.3f64, -1.2), (1.1, 0.4), (2.5, 2.0)] {
            let e = (-t).exp();
            let s = (1.0 - e * e).sqrt();
            let num = integrate_gamma(1, &cfg, |y| {
                let z = e * x + s * y[0];
                z * d.value(&[z])
            })
            .unwrap();
            let closed = pt_xf(&d, t, &[x]).unwrap();
            assert!((num.value - closed[0]).abs() < 1e-10, "{} vs {}", num.value, closed[0]);
        }
    }
}
