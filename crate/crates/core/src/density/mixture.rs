use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, matvec, quad_form, to_flat};
use crate::{Error, Result};

pub(crate) const MAX_DIM: usize = 8;
const WEIGHT_SUM_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;
const MIN_EIGENVALUE: f64 = 1e-10;

/// One weighted Gaussian component.
///
/// `cov_dev = cov - Id` is stored alongside the covariance: the OU flow
/// contracts it as `e^{-2t}·cov_dev`, and keeping it exact preserves the
/// relative accuracy of scores and Hessians once components are close to `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    weight: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    cov_dev: DMatrix<f64>,
}

impl Component {
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `cov - Id`.
    pub fn cov_dev(&self) -> &DMatrix<f64> {
        &self.cov_dev
    }

    pub(crate) fn from_parts(weight: f64, mean: DVector<f64>, cov: DMatrix<f64>, cov_dev: DMatrix<f64>) -> Self {
        Self { weight, mean, cov, cov_dev }
    }
}

/// Finite mixture of Gaussians on `R^n`, viewed through its density with
/// respect to the standard Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    dim: usize,
    components: Vec<Component>,
}

impl GaussianMixture {
    /// Builds and validates a mixture from `(weight, mean, covariance rows)`.
    pub fn new(dim: usize, components: Vec<(f64, Vec<f64>, Vec<Vec<f64>>)>) -> Result<Self> {
        let mut parts = Vec::with_capacity(components.len());
        for (k, (w, mean, cov)) in components.into_iter().enumerate() {
            if mean.len() != dim {
                return Err(Error::InvalidDensity(format!(
                    "component {k}: mean has length {}, expected {dim}",
                    mean.len()
                )));
            }
            if cov.len() != dim || cov.iter().any(|row| row.len() != dim) {
                return Err(Error::InvalidDensity(format!("component {k}: covariance is not {dim}x{dim}")));
            }
            let flat: Vec<f64> = cov.into_iter().flatten().collect();
            parts.push((w, DVector::from_vec(mean), DMatrix::from_row_slice(dim, dim, &flat)));
        }
        Self::from_matrices(dim, parts)
    }

    pub fn from_matrices(dim: usize, components: Vec<(f64, DVector<f64>, DMatrix<f64>)>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidDensity(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        if components.is_empty() {
            return Err(Error::InvalidDensity("mixture has no components".into()));
        }
        let mut total = 0.0;
        let mut out = Vec::with_capacity(components.len());
        for (k, (w, mean, cov)) in components.into_iter().enumerate() {
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::InvalidDensity(format!("component {k}: weight {w} outside (0, 1]")));
            }
            if mean.len() != dim || cov.nrows() != dim || cov.ncols() != dim {
                return Err(Error::InvalidDensity(format!("component {k}: shape mismatch")));
            }
            if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidDensity(format!("component {k}: non-finite parameter")));
            }
            let asym = (&cov - cov.transpose()).abs().max();
            if asym > SYMMETRY_TOL {
                return Err(Error::InvalidDensity(format!("component {k}: covariance asymmetric by {asym:.3e}")));
            }
            let cov = linalg::symmetrize(&cov);
            let lambda = linalg::min_eigenvalue(&cov);
            if lambda <= MIN_EIGENVALUE {
                return Err(Error::InvalidDensity(format!(
                    "component {k}: covariance eigenvalue {lambda:.3e} below {MIN_EIGENVALUE:e}"
                )));
            }
            total += w;
            let cov_dev = &cov - DMatrix::identity(dim, dim);
            out.push(Component { weight: w, mean, cov, cov_dev });
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDensity(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { dim, components: out })
    }

    pub(crate) fn from_components_unchecked(dim: usize, components: Vec<Component>) -> Self {
        Self { dim, components }
    }

    /// `N(mean, var)` on the line.
    pub fn gaussian_1d(mean: f64, var: f64) -> Result<Self> {
        Self::new(1, vec![(1.0, vec![mean], vec![vec![var]])])
    }

    pub fn gaussian(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        Self::from_matrices(dim, vec![(1.0, mean, cov)])
    }

    /// `γ` itself (relative density identically one).
    pub fn standard(dim: usize) -> Self {
        Self {
            dim,
            components: vec![Component {
                weight: 1.0,
                mean: DVector::zeros(dim),
                cov: DMatrix::identity(dim, dim),
                cov_dev: DMatrix::zeros(dim, dim),
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_single_gaussian(&self) -> bool {
        self.components.len() == 1
    }

    pub fn mean(&self) -> DVector<f64> {
        self.components.iter().fold(DVector::zeros(self.dim), |acc, c| acc + &c.mean * c.weight)
    }

    /// Exact mixture covariance `Σ w_k (Σ_k + m_k m_kᵀ) - b bᵀ`, computed
    /// around the barycenter to avoid cancellation.
    pub fn covariance(&self) -> DMatrix<f64> {
        let b = self.mean();
        self.components.iter().fold(DMatrix::zeros(self.dim, self.dim), |acc, c| {
            let d = &c.mean - &b;
            acc + (&c.cov + &d * d.transpose()) * c.weight
        })
    }

    /// `∫|x|² dμ`.
    pub fn second_moment(&self) -> f64 {
        self.components.iter().map(|c| c.weight * (c.cov.trace() + c.mean.norm_squared())).sum()
    }

    /// Law of `X + shift`.
    pub fn translated(&self, shift: &DVector<f64>) -> Self {
        Self {
            dim: self.dim,
            components: self.components.iter().map(|c| Component { mean: &c.mean + shift, ..c.clone() }).collect(),
        }
    }

    pub fn evaluator(&self) -> MixtureEval {
        MixtureEval::new(self)
    }
}

#[derive(Debug, Clone)]
struct ComponentEval {
    /// `ln w_k - ½ ln det(2π Σ_k)`.
    log_coef: f64,
    mean: Vec<f64>,
    precision: Vec<f64>,
    /// `Σ_k^{-1}(Σ_k - Id) = Id - Σ_k^{-1}`.
    dev_precision: Vec<f64>,
    /// `Σ_k^{-1} m_k`.
    precision_mean: Vec<f64>,
}

/// Pointwise evaluator of a mixture's Lebesgue density and of its density
/// relative to `γ`, with score and Hessian of the log relative density.
#[derive(Debug, Clone)]
pub struct MixtureEval {
    dim: usize,
    comps: Vec<ComponentEval>,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl MixtureEval {
    fn new(mix: &GaussianMixture) -> Self {
        let n = mix.dim;
        let comps = mix
            .components
            .iter()
            .map(|c| {
                let chol = nalgebra::Cholesky::new(c.cov.clone()).expect("validated covariance");
                let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
                let precision = chol.inverse();
                let dev_precision = &precision * &c.cov_dev;
                let precision_mean = &precision * &c.mean;
                ComponentEval {
                    log_coef: c.weight.ln() - 0.5 * (n as f64 * (2.0 * PI).ln() + log_det),
                    mean: c.mean.iter().copied().collect(),
                    precision: to_flat(&precision),
                    dev_precision: to_flat(&linalg::symmetrize(&dev_precision)),
                    precision_mean: precision_mean.iter().copied().collect(),
                }
            })
            .collect();
        Self { dim: n, comps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fills `logs[k] = ln(w_k N(x; m_k, Σ_k))`, returns the log density.
    fn component_logs(&self, x: &[f64], logs: &mut [f64]) -> f64 {
        let n = self.dim;
        let mut d = [0.0; MAX_DIM];
        for (k, c) in self.comps.iter().enumerate() {
            for i in 0..n {
                d[i] = x[i] - c.mean[i];
            }
            logs[k] = c.log_coef - 0.5 * quad_form(&c.precision, n, &d[..n]);
        }
        log_sum_exp(logs)
    }

    /// Lebesgue log density.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let mut logs = vec![0.0; self.comps.len()];
        self.component_logs(x, &mut logs)
    }

    /// Posterior component probabilities at `x`; returns the log density.
    pub fn responsibilities(&self, x: &[f64], r: &mut [f64]) -> f64 {
        let lp = self.component_logs(x, r);
        for v in r.iter_mut() {
            *v = (*v - lp).exp();
        }
        lp
    }

    /// `ln f(x)` where `f = dμ/dγ`.
    pub fn log_relative(&self, x: &[f64]) -> f64 {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        self.log_density(x) + 0.5 * sq + 0.5 * self.dim as f64 * (2.0 * PI).ln()
    }

    pub fn relative(&self, x: &[f64]) -> f64 {
        self.log_relative(x).exp()
    }

    /// `∇ ln f(x) = Σ_k r_k(x) [(Id - Σ_k^{-1}) x + Σ_k^{-1} m_k]`.
    pub fn score_relative(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        let mut r = vec![0.0; self.comps.len()];
        self.responsibilities(x, &mut r);
        let mut tmp = [0.0; MAX_DIM];
        out[..n].iter_mut().for_each(|v| *v = 0.0);
        for (c, rk) in self.comps.iter().zip(&r) {
            if *rk == 0.0 {
                continue;
            }
            matvec(&c.dev_precision, n, x, &mut tmp[..n]);
            for i in 0..n {
                out[i] += rk * (tmp[i] + c.precision_mean[i]);
            }
        }
    }

    /// `Hess ln f(x) = Σ_k r_k (Id - Σ_k^{-1}) + Cov_r(g_k)`, where
    /// `g_k = -Σ_k^{-1}(x - m_k)` are the component scores. Row-major `n×n`.
    pub fn hess_log_relative(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        let kc = self.comps.len();
        let mut r = vec![0.0; kc];
        self.responsibilities(x, &mut r);
        let mut g = vec![0.0; kc * n];
        let mut d = [0.0; MAX_DIM];
        let mut gbar = [0.0; MAX_DIM];
        for (k, c) in self.comps.iter().enumerate() {
            for i in 0..n {
                d[i] = c.mean[i] - x[i];
            }
            matvec(&c.precision, n, &d[..n], &mut g[k * n..(k + 1) * n]);
            for i in 0..n {
                gbar[i] += r[k] * g[k * n + i];
            }
        }
        out[..n * n].iter_mut().for_each(|v| *v = 0.0);
        for (k, c) in self.comps.iter().enumerate() {
            let rk = r[k];
            if rk == 0.0 {
                continue;
            }
            for i in 0..n {
                let gi = g[k * n + i] - gbar[i];
                for j in 0..n {
                    let gj = g[k * n + j] - gbar[j];
                    out[i * n + j] += rk * (c.dev_precision[i * n + j] + gi * gj);
                }
            }
        }
    }

    /// `∇f(x)`.
    pub fn grad_relative(&self, x: &[f64], out: &mut [f64]) {
        let f = self.relative(x);
        self.score_relative(x, out);
        out[..self.dim].iter_mut().for_each(|v| *v *= f);
    }

    /// `Hess f(x) = f (Hess ln f + ∇ln f ⊗ ∇ln f)`.
    pub fn hess_relative(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        let f = self.relative(x);
        let mut s = [0.0; MAX_DIM];
        self.score_relative(x, &mut s[..n]);
        self.hess_log_relative(x, out);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = f * (out[i * n + j] + s[i] * s[j]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bimodal() -> GaussianMixture {
        GaussianMixture::new(1, vec![(0.5, vec![-1.0], vec![vec![1.0]]), (0.5, vec![1.0], vec![vec![1.0]])]).unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        let err = GaussianMixture::new(1, vec![(0.45, vec![0.0], vec![vec![1.0]]), (0.45, vec![1.0], vec![vec![1.0]])]);
        assert!(matches!(err, Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn rejects_degenerate_covariance() {
        assert!(GaussianMixture::gaussian_1d(0.0, 1e-11).is_err());
        let asym = GaussianMixture::new(2, vec![(1.0, vec![0.0, 0.0], vec![vec![1.0, 0.1], vec![0.2, 1.0]])]);
        assert!(asym.is_err());
    }

    #[test]
    fn rejects_large_dimension() {
        assert!(GaussianMixture::from_matrices(9, vec![(1.0, DVector::zeros(9), DMatrix::identity(9, 9))]).is_err());
    }

    #[test]
    fn standard_gaussian_has_unit_relative_density() {
        let e = GaussianMixture::standard(2).evaluator();
        for x in [[0.0, 0.0], [1.5, -2.0], [7.0, 3.0]] {
            assert!(e.log_relative(&x).abs() < 1e-12);
            let mut s = [9.0; 2];
            e.score_relative(&x, &mut s);
            assert_eq!(s, [0.0, 0.0]);
        }
    }

    #[test]
    fn bimodal_moments() {
        let m = bimodal();
        assert_eq!(m.mean()[0], 0.0);
        assert!((m.covariance()[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((m.second_moment() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn score_matches_finite_difference() {
        let e = GaussianMixture::new(
            2,
            vec![
                (0.4, vec![-1.0, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.6]]),
                (0.6, vec![1.0, -0.3], vec![vec![1.3, -0.1], vec![-0.1, 0.9]]),
            ],
        )
        .unwrap()
        .evaluator();
        let x = [0.3, -0.7];
        let mut s = [0.0; 2];
        e.score_relative(&x, &mut s);
        let mut h = [0.0; 4];
        e.hess_log_relative(&x, &mut h);
        let eps = 1e-5;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += eps;
            xm[i] -= eps;
            let fd = (e.log_relative(&xp) - e.log_relative(&xm)) / (2.0 * eps);
            assert!((fd - s[i]).abs() < 1e-8, "score {i}: {fd} vs {}", s[i]);
            let mut sp = [0.0; 2];
            let mut sm = [0.0; 2];
            e.score_relative(&xp, &mut sp);
            e.score_relative(&xm, &mut sm);
            for j in 0..2 {
                let fd = (sp[j] - sm[j]) / (2.0 * eps);
                assert!((fd - h[j * 2 + i]).abs() < 1e-7, "hess {i}{j}");
            }
        }
    }
}
