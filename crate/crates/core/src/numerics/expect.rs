use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::rules::{adaptive_gk15, gauss_hermite};
use super::{pairwise_sum, Estimate, QuadratureConfig};
use crate::density::GaussianMixture;
use crate::{Error, Result};

const CHUNK: usize = 512;
/// Two-sided 99% normal quantile.
const Z99: f64 = 2.575_829_303_548_901;

/// Weighted evaluation points in `R^n`.
///
/// Quadrature sets come from tensor Gauss–Hermite rules mapped through each
/// mixture component's Cholesky factor; Monte Carlo sets are stratified by
/// component, each stratum drawn from its own seeded stream.
#[derive(Debug, Clone)]
pub struct NodeSet {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    /// Monte Carlo strata: `(start, end, stratum weight)`.
    strata: Option<Vec<(usize, usize, f64)>>,
}

fn tensor_rule(dim: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_hermite(order);
    let count = order.pow(dim as u32);
    let mut points = Vec::with_capacity(count * dim);
    let mut weights = Vec::with_capacity(count);
    let mut idx = vec![0usize; dim];
    for _ in 0..count {
        let mut w = 1.0;
        for &i in &idx {
            points.push(rule.nodes[i]);
            w *= rule.weights[i];
        }
        weights.push(w);
        for axis in (0..dim).rev() {
            idx[axis] += 1;
            if idx[axis] < order {
                break;
            }
            idx[axis] = 0;
        }
    }
    (points, weights)
}

fn cholesky(cov: &DMatrix<f64>) -> DMatrix<f64> {
    nalgebra::Cholesky::new(cov.clone()).expect("validated covariances are positive definite").l()
}

impl NodeSet {
    /// Tensor Gauss–Hermite nodes for `γ` on `R^dim`.
    pub fn standard(dim: usize, order: usize) -> Self {
        let (points, weights) = tensor_rule(dim, order);
        Self { dim, points, weights, strata: None }
    }

    /// Gauss–Hermite nodes for a mixture at the given per-axis order.
    pub fn mixture_quadrature(mix: &GaussianMixture, order: usize) -> Self {
        let dim = mix.dim();
        let (base_points, base_weights) = tensor_rule(dim, order);
        let mut points = Vec::with_capacity(base_points.len() * mix.components().len());
        let mut weights = Vec::with_capacity(base_weights.len() * mix.components().len());
        for comp in mix.components() {
            let l = cholesky(comp.cov());
            for (z, w) in base_points.chunks(dim).zip(&base_weights) {
                let z = DVector::from_column_slice(z);
                let x = comp.mean() + &l * z;
                points.extend(x.iter());
                weights.push(comp.weight() * w);
            }
        }
        Self { dim, points, weights, strata: None }
    }

    /// Stratified Monte Carlo sample of a mixture.
    pub fn mixture_monte_carlo(mix: &GaussianMixture, samples: usize, seed: u64) -> Self {
        let dim = mix.dim();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut strata = Vec::new();
        for (k, comp) in mix.components().iter().enumerate() {
            let count = ((samples as f64 * comp.weight()).round() as usize).max(1);
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k as u64 + 1)));
            let l = cholesky(comp.cov());
            let start = weights.len();
            for _ in 0..count {
                let z = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
                let x = comp.mean() + &l * z;
                points.extend(x.iter());
                weights.push(comp.weight() / count as f64);
            }
            strata.push((start, weights.len(), comp.weight()));
        }
        Self { dim, points, weights, strata: Some(strata) }
    }

    /// Default node set for a mixture under `cfg`.
    pub fn for_mixture(mix: &GaussianMixture, cfg: &QuadratureConfig) -> Self {
        match cfg.gh_order(mix.dim()) {
            Some(order) => Self::mixture_quadrature(mix, order),
            None => Self::mixture_monte_carlo(mix, cfg.mc_samples, cfg.seed),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_monte_carlo(&self) -> bool {
        self.strata.is_some()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks(self.dim)
    }

    /// `Σ w_i g(x_i)`, summed in fixed chunks so the result does not depend
    /// on the thread count.
    pub fn sum<F>(&self, g: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let dim = self.dim;
        let chunk_sum = |c: usize| -> f64 {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(self.len());
            let terms: Vec<f64> = (lo..hi)
                .map(|i| {
                    let w = self.weights[i];
                    if w == 0.0 {
                        0.0
                    } else {
                        w * g(&self.points[i * dim..(i + 1) * dim])
                    }
                })
                .collect();
            pairwise_sum(&terms)
        };
        let chunks = self.len().div_ceil(CHUNK);
        let partial: Vec<f64> = if chunks > 4 {
            (0..chunks).into_par_iter().map(chunk_sum).collect()
        } else {
            (0..chunks).map(chunk_sum).collect()
        };
        pairwise_sum(&partial)
    }

    /// Vector-valued version of [`NodeSet::sum`]; `g` writes `width` values.
    pub fn sum_vec<F>(&self, width: usize, g: F) -> Vec<f64>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let dim = self.dim;
        let chunk_sum = |c: usize| -> Vec<f64> {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(self.len());
            let mut acc = vec![0.0; width];
            let mut buf = vec![0.0; width];
            for i in lo..hi {
                let w = self.weights[i];
                if w == 0.0 {
                    continue;
                }
                buf.iter_mut().for_each(|b| *b = 0.0);
                g(&self.points[i * dim..(i + 1) * dim], &mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += w * b;
                }
            }
            acc
        };
        let chunks = self.len().div_ceil(CHUNK);
        let partial: Vec<Vec<f64>> = if chunks > 4 {
            (0..chunks).into_par_iter().map(chunk_sum).collect()
        } else {
            (0..chunks).map(chunk_sum).collect()
        };
        (0..width).map(|j| pairwise_sum(&partial.iter().map(|p| p[j]).collect::<Vec<_>>())).collect()
    }

    /// Half-width of the 99% confidence interval of a Monte Carlo mean.
    fn mc_half_width<F>(&self, g: &F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let Some(strata) = &self.strata else {
            return 0.0;
        };
        let mut var = 0.0;
        for &(lo, hi, weight) in strata {
            let n = (hi - lo) as f64;
            if n < 2.0 {
                continue;
            }
            let vals: Vec<f64> = (lo..hi).map(|i| g(&self.points[i * self.dim..(i + 1) * self.dim])).collect();
            let mean = pairwise_sum(&vals) / n;
            let sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
            let s2 = pairwise_sum(&sq) / (n - 1.0);
            var += weight * weight * s2 / n;
        }
        Z99 * var.sqrt()
    }
}

fn checked(what: &'static str, value: f64, error: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if !value.is_finite() {
        return Err(Error::ToleranceExceeded { what, achieved: f64::INFINITY, tolerance: cfg.tol });
    }
    let accepted = cfg.accepted_gh_error(value);
    if error > accepted {
        return Err(Error::ToleranceExceeded { what, achieved: error, tolerance: accepted });
    }
    Ok(Estimate::new(value, error))
}

/// Panel breaks in standardized coordinates; the Gaussian weight is below
/// `1e-86` past the outer ones.
const LINE_BREAKS: [f64; 8] = [-20.0, -12.0, -6.0, -2.0, 2.0, 6.0, 12.0, 20.0];

/// Adaptive Gauss–Kronrod fallback for 1-D mixtures, used when the
/// integrand is not smooth enough for order doubling to settle (posterior
/// log-sum-exp switching between distant components, for instance).
fn adaptive_line<F: FnMut(f64) -> f64>(mix: &GaussianMixture, cfg: &QuadratureConfig, mut g: F) -> Result<Estimate> {
    let segments = (LINE_BREAKS.len() - 1) * mix.components().len();
    let abs_tol = cfg.tol / segments as f64;
    let mut value = Vec::with_capacity(segments);
    let mut error = 0.0;
    for comp in mix.components() {
        let (m, s) = (comp.mean()[0], comp.cov()[(0, 0)].sqrt());
        for ab in LINE_BREAKS.windows(2) {
            let e = adaptive_gk15(
                |z| {
                    let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
                    if phi == 0.0 {
                        0.0
                    } else {
                        phi * g(m + s * z)
                    }
                },
                ab[0],
                ab[1],
                abs_tol,
                1e-12,
                2000,
            )?;
            value.push(comp.weight() * e.value);
            error += comp.weight() * e.error;
        }
    }
    Ok(Estimate::new(pairwise_sum(&value), error))
}

/// `E_μ[g(X)]` for a mixture `μ`, with an order-doubling (quadrature) or 99%
/// confidence (Monte Carlo) error estimate.
pub fn expect_mixture<F>(mix: &GaussianMixture, cfg: &QuadratureConfig, g: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match cfg.gh_order(mix.dim()) {
        Some(order) => {
            let fine = NodeSet::mixture_quadrature(mix, order).sum(&g);
            let coarse = NodeSet::mixture_quadrature(mix, (order / 2).max(4)).sum(&g);
            let gh = checked("mixture expectation", fine, (fine - coarse).abs(), cfg);
            match gh {
                Err(Error::ToleranceExceeded { .. }) if mix.dim() == 1 => {
                    let e = adaptive_line(mix, cfg, |x| g(&[x]))?;
                    checked("mixture expectation", e.value, e.error, cfg)
                }
                r => r,
            }
        }
        None => {
            let nodes = NodeSet::mixture_monte_carlo(mix, cfg.mc_samples, cfg.seed);
            Ok(Estimate::new(nodes.sum(&g), nodes.mc_half_width(&g)))
        }
    }
}

/// Vector-valued [`expect_mixture`].
pub fn expect_mixture_vec<F>(mix: &GaussianMixture, cfg: &QuadratureConfig, width: usize, g: F) -> Result<Vec<Estimate>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    match cfg.gh_order(mix.dim()) {
        Some(order) => {
            let fine = NodeSet::mixture_quadrature(mix, order).sum_vec(width, &g);
            let coarse = NodeSet::mixture_quadrature(mix, (order / 2).max(4)).sum_vec(width, &g);
            let gh: Result<Vec<Estimate>> =
                fine.iter().zip(&coarse).map(|(f, c)| checked("mixture expectation", *f, (f - c).abs(), cfg)).collect();
            match gh {
                Err(Error::ToleranceExceeded { .. }) if mix.dim() == 1 => (0..width)
                    .map(|j| {
                        let mut buf = vec![0.0; width];
                        let e = adaptive_line(mix, cfg, |x| {
                            buf.iter_mut().for_each(|b| *b = 0.0);
                            g(&[x], &mut buf);
                            buf[j]
                        })?;
                        checked("mixture expectation", e.value, e.error, cfg)
                    })
                    .collect(),
                r => r,
            }
        }
        None => {
            let nodes = NodeSet::mixture_monte_carlo(mix, cfg.mc_samples, cfg.seed);
            let values = nodes.sum_vec(width, &g);
            Ok((0..width)
                .map(|j| {
                    let gj = |x: &[f64]| {
                        let mut buf = vec![0.0; width];
                        g(x, &mut buf);
                        buf[j]
                    };
                    Estimate::new(values[j], nodes.mc_half_width(&gj))
                })
                .collect())
        }
    }
}

/// `∫ g dγ` on `R^dim` by tensor Gauss–Hermite (dimensions one and two) with
/// an order-doubling error estimate, or by seeded Monte Carlo beyond.
pub fn integrate_gamma<F>(dim: usize, cfg: &QuadratureConfig, g: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let standard = GaussianMixture::standard(dim);
    match cfg.gh_order(dim) {
        Some(order) => {
            let fine = NodeSet::standard(dim, order).sum(&g);
            let coarse = NodeSet::standard(dim, (order / 2).max(4)).sum(&g);
            checked("Gauss-Hermite integral", fine, (fine - coarse).abs(), cfg)
        }
        None => {
            let nodes = NodeSet::mixture_monte_carlo(&standard, cfg.mc_samples, cfg.seed);
            Ok(Estimate::new(nodes.sum(&g), nodes.mc_half_width(&g)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let cfg = QuadratureConfig::default();
        let one = integrate_gamma(1, &cfg, |_| 1.0).unwrap();
        assert!((one.value - 1.0).abs() < 1e-14);
        let m2 = integrate_gamma(1, &cfg, |x| x[0] * x[0]).unwrap();
        assert!((m2.value - 1.0).abs() < 1e-13);
        let m4 = integrate_gamma(1, &cfg, |x| x[0].powi(4)).unwrap();
        assert!((m4.value - 3.0).abs() < 1e-12);
        let cross = integrate_gamma(2, &cfg, |x| x[0] * x[0] * x[1] * x[1]).unwrap();
        assert!((cross.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let cfg = QuadratureConfig { mc_samples: 20_000, ..Default::default() };
        let a = integrate_gamma(3, &cfg, |x| x[0] * x[0] + x[2]).unwrap();
        let b = integrate_gamma(3, &cfg, |x| x[0] * x[0] + x[2]).unwrap();
        assert_eq!(a, b);
        assert!((a.value - 1.0).abs() < 5.0 * a.error.max(1e-3));
        assert!(a.error > 0.0);
    }

    #[test]
    fn mixture_expectation_of_square() {
        let mix = GaussianMixture::new(1, vec![(0.3, vec![-1.0], vec![vec![0.5]]), (0.7, vec![2.0], vec![vec![1.5]])])
            .unwrap();
        let e = expect_mixture(&mix, &QuadratureConfig::default(), |x| x[0] * x[0]).unwrap();
        let exact = 0.3 * (1.0 + 0.5) + 0.7 * (4.0 + 1.5);
        assert!((e.value - exact).abs() < 1e-12);
    }
}
