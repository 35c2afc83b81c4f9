use std::f64::consts::FRAC_PI_2;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::density::GaussianMixture;
use crate::numerics::rules::{adaptive_gk15, gauss_hermite, gauss_legendre};
use crate::numerics::{Estimate, NodeSet};
use crate::ou::evolve_mixture;
use crate::{Error, Result};

type C64 = Complex<f64>;

const RESOLVENT_GL_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Re,
    Im,
}

/// Shape of a test function, before scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunctionKind {
    /// `sin(λ·x + θ)`.
    Sinusoid { lambda: Vec<f64>, phase: f64 },
    /// `Π_i He_{k_i}(x_i)` with probabilists' Hermite polynomials.
    Hermite { index: Vec<usize> },
    /// Real or imaginary part of `e^{iλ·x}`.
    Fourier { lambda: Vec<f64>, part: Part },
}

/// `scale × kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    #[serde(flatten)]
    pub kind: TestFunctionKind,
    pub scale: f64,
}

/// Sup-norms of `φ`, `∇φ`, `Hess φ` for a class-B candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassBCertificate {
    pub sup: f64,
    pub sup_gradient: f64,
    pub sup_hessian: f64,
}

impl ClassBCertificate {
    /// Sup-norms at most one, up to rounding in `c|λ|^k`.
    pub fn admissible(&self) -> bool {
        let one = 1.0 + 4.0 * f64::EPSILON;
        self.sup <= one && self.sup_gradient <= one && self.sup_hessian <= one
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `He_0..=He_k` at `x`.
pub(crate) fn hermite_values(k: usize, x: f64) -> Vec<f64> {
    let mut h = vec![1.0; k + 1];
    if k >= 1 {
        h[1] = x;
    }
    for j in 1..k {
        h[j + 1] = x * h[j] - j as f64 * h[j - 1];
    }
    h
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

impl TestFunction {
    /// `c sin(λ·x + θ)` with `c = 1/max(1, |λ|, |λ|²)`, admissible in class B.
    pub fn sinusoid(lambda: Vec<f64>, phase: f64) -> Self {
        let l = norm(&lambda);
        Self { kind: TestFunctionKind::Sinusoid { lambda, phase }, scale: 1.0 / l.max(1.0).max(l * l) }
    }

    pub fn hermite(index: Vec<usize>) -> Self {
        Self { kind: TestFunctionKind::Hermite { index }, scale: 1.0 }
    }

    pub fn fourier(lambda: Vec<f64>, part: Part) -> Self {
        Self { kind: TestFunctionKind::Fourier { lambda, part }, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            TestFunctionKind::Sinusoid { lambda, .. } | TestFunctionKind::Fourier { lambda, .. } => lambda.len(),
            TestFunctionKind::Hermite { index } => index.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.scale * self.eval_unscaled(x)
    }

    fn eval_unscaled(&self, x: &[f64]) -> f64 {
        match &self.kind {
            TestFunctionKind::Sinusoid { lambda, phase } => (dot(lambda, x) + phase).sin(),
            TestFunctionKind::Hermite { index } => {
                index.iter().zip(x).map(|(&k, &xi)| hermite_values(k, xi)[k]).product()
            }
            TestFunctionKind::Fourier { lambda, part } => match part {
                Part::Re => dot(lambda, x).cos(),
                Part::Im => dot(lambda, x).sin(),
            },
        }
    }

    /// Certified class-B constants; only sinusoids are bounded.
    pub fn class_b_certificate(&self) -> Option<ClassBCertificate> {
        match &self.kind {
            TestFunctionKind::Sinusoid { lambda, .. } => {
                let l = norm(lambda);
                let c = self.scale.abs();
                Some(ClassBCertificate { sup: c, sup_gradient: c * l, sup_hessian: c * l * l })
            }
            _ => None,
        }
    }

    /// `∫ ψ² dγ`, the `t → ∞` limit of `∫ ψ² P_tf dγ`.
    pub fn gamma_second_moment(&self) -> Result<f64> {
        let s2 = self.scale * self.scale;
        match &self.kind {
            TestFunctionKind::Hermite { index } => Ok(s2 * index.iter().map(|&k| factorial(k)).product::<f64>()),
            TestFunctionKind::Fourier { lambda, part } => {
                let e = (-2.0 * dot(lambda, lambda)).exp();
                Ok(s2
                    * match part {
                        Part::Re => 0.5 * (1.0 + e),
                        Part::Im => 0.5 * (1.0 - e),
                    })
            }
            TestFunctionKind::Sinusoid { .. } => Err(Error::UnsupportedKind("second moment under γ")),
        }
    }

    /// `∫ ψ² dμ` for a mixture `μ`.
    pub fn second_moment(&self, mix: &GaussianMixture) -> Result<f64> {
        let s2 = self.scale * self.scale;
        match &self.kind {
            TestFunctionKind::Hermite { index } => {
                // Polynomial of degree 2Σk: exact for a rule of order Σk + 1.
                let order = (index.iter().sum::<usize>() + 2).max(8);
                let nodes = NodeSet::mixture_quadrature(mix, order);
                Ok(s2 * nodes.sum(|x| self.eval_unscaled(x).powi(2)))
            }
            TestFunctionKind::Fourier { lambda, part } => {
                // cos² = (1 + cos 2θ)/2, sin² = (1 - cos 2θ)/2.
                let two: Vec<f64> = lambda.iter().map(|v| 2.0 * v).collect();
                let re = characteristic(mix, &two).re;
                Ok(s2
                    * match part {
                        Part::Re => 0.5 * (1.0 + re),
                        Part::Im => 0.5 * (1.0 - re),
                    })
            }
            TestFunctionKind::Sinusoid { .. } => Err(Error::UnsupportedKind("second moment under μ")),
        }
    }
}

/// `E_μ[e^{iw·X}]`.
pub(crate) fn characteristic(mix: &GaussianMixture, w: &[f64]) -> C64 {
    let wv = nalgebra::DVector::from_column_slice(w);
    mix.components()
        .iter()
        .map(|c| {
            let q = (c.cov() * &wv).dot(&wv);
            c.weight() * C64::from_polar((-0.5 * q).exp(), wv.dot(c.mean()))
        })
        .sum()
}

/// `G(w) = E_μ[(X - iw) e^{iw·X}]`, the Stein defect of the Fourier mode
/// `e^{iw·x}`. Per component `N(m, Σ)`: `(m + iΣw - iw) e^{iw·m - wᵀΣw/2}`.
pub(crate) fn fourier_defect(mix: &GaussianMixture, w: &[f64]) -> Vec<C64> {
    let n = mix.dim();
    let wv = nalgebra::DVector::from_column_slice(w);
    let mut out = vec![C64::new(0.0, 0.0); n];
    for c in mix.components() {
        let sw = c.cov() * &wv;
        let e = c.weight() * C64::from_polar((-0.5 * sw.dot(&wv)).exp(), wv.dot(c.mean()));
        for i in 0..n {
            out[i] += C64::new(c.mean()[i], sw[i] - w[i]) * e;
        }
    }
    out
}

/// `R_ε ψ = 4∫_s^∞ e^{-4t} P_tψ dt` with `ε = e^{-4s}` (`R_1 = R`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolvent {
    pub psi: TestFunction,
    pub eps: f64,
}

/// `(4/(4+k)) ε^{(4+k)/4}`: the action of `R_ε` on a Hermite polynomial of
/// total degree `k` (an eigenfunction of `P_t` with eigenvalue `e^{-kt}`).
pub fn hermite_resolvent_factor(k: usize, eps: f64) -> f64 {
    let k = k as f64;
    4.0 / (4.0 + k) * eps.powf((4.0 + k) / 4.0)
}

pub fn resolvent(psi: &TestFunction, eps: f64) -> Result<Resolvent> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidConfig(format!("resolvent parameter must lie in (0, 1], got {eps}")));
    }
    match psi.kind {
        TestFunctionKind::Sinusoid { .. } => Err(Error::UnsupportedKind("resolvent")),
        _ => Ok(Resolvent { psi: psi.clone(), eps }),
    }
}

impl Resolvent {
    /// `(R_ε ψ)(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.psi.kind {
            TestFunctionKind::Hermite { index } => {
                hermite_resolvent_factor(index.iter().sum(), self.eps) * self.psi.eval(x)
            }
            TestFunctionKind::Fourier { lambda, part } => {
                let lx = dot(lambda, x);
                let v = fourier_resolvent_integral(lambda, self.eps, |u| C64::from_polar(1.0, u * lx));
                self.psi.scale * select(v, *part)
            }
            TestFunctionKind::Sinusoid { .. } => unreachable!("rejected at construction"),
        }
    }

    /// `∫ [xφ - ∇φ] dμ` for `φ = R_ε ψ`.
    pub fn stein_defect(&self, mix: &GaussianMixture) -> Vec<f64> {
        let n = mix.dim();
        match &self.psi.kind {
            TestFunctionKind::Hermite { index } => {
                // x_j He_k(x_j) - He_k'(x_j) = He_{k+1}(x_j).
                let k: usize = index.iter().sum();
                let order = (k + 4).max(8);
                let nodes = NodeSet::mixture_quadrature(mix, order);
                let moments = nodes.sum_vec(n, |x, out| {
                    let h: Vec<Vec<f64>> = index.iter().zip(x).map(|(&ki, &xi)| hermite_values(ki + 1, xi)).collect();
                    for (j, o) in out.iter_mut().enumerate() {
                        *o = (0..n).map(|i| if i == j { h[i][index[i] + 1] } else { h[i][index[i]] }).product();
                    }
                });
                let f = hermite_resolvent_factor(k, self.eps) * self.psi.scale;
                moments.into_iter().map(|m| f * m).collect()
            }
            TestFunctionKind::Fourier { lambda, part } => {
                let mut acc = vec![C64::new(0.0, 0.0); n];
                let rule = gauss_legendre(RESOLVENT_GL_ORDER);
                let top = self.eps.powf(0.25);
                let l2 = dot(lambda, lambda);
                for (node, weight) in rule.nodes.iter().zip(&rule.weights) {
                    let u = 0.5 * top * (node + 1.0);
                    let w: Vec<f64> = lambda.iter().map(|v| u * v).collect();
                    let g = fourier_defect(mix, &w);
                    let coef = 0.5 * top * weight * 4.0 * u.powi(3) * (-0.5 * l2 * (1.0 - u * u)).exp();
                    for j in 0..n {
                        acc[j] += g[j] * coef;
                    }
                }
                acc.into_iter().map(|v| self.psi.scale * select(v, *part)).collect()
            }
            TestFunctionKind::Sinusoid { .. } => unreachable!("rejected at construction"),
        }
    }
}

fn select(v: C64, part: Part) -> f64 {
    match part {
        Part::Re => v.re,
        Part::Im => v.im,
    }
}

/// `4∫₀^{ε^{1/4}} u³ e^{-|λ|²(1-u²)/2} h(u) du` by Gauss–Legendre, where `h(u)`
/// is the Fourier mode at frequency `uλ`.
fn fourier_resolvent_integral(lambda: &[f64], eps: f64, h: impl Fn(f64) -> C64) -> C64 {
    let rule = gauss_legendre(RESOLVENT_GL_ORDER);
    let top = eps.powf(0.25);
    let l2 = dot(lambda, lambda);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(node, weight)| {
            let u = 0.5 * top * (node + 1.0);
            h(u) * (0.5 * top * weight * 4.0 * u.powi(3) * (-0.5 * l2 * (1.0 - u * u)).exp())
        })
        .sum()
}

/// `P_tψ(x) = ∫ ψ(e^{-t}x + √(1-e^{-2t}) y) dγ(y)` by tensor Gauss–Hermite.
pub fn ou_apply(psi: &TestFunction, t: f64, x: &[f64], order: usize) -> f64 {
    let n = x.len();
    let e = (-t).exp();
    let s = (-(-2.0 * t).exp_m1()).sqrt();
    let rule = gauss_hermite(order);
    let mut idx = vec![0usize; n];
    let mut z = vec![0.0; n];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for i in 0..n {
            z[i] = e * x[i] + s * rule.nodes[idx[i]];
            w *= rule.weights[idx[i]];
        }
        total += w * psi.eval(&z);
        let mut axis = n;
        loop {
            if axis == 0 {
                return total;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < order {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// `(R_ε ψ)(x)` by direct quadrature of `4∫_s^∞ e^{-4t} P_tψ(x) dt`, written
/// as `4∫₀^{ε^{1/4}} u³ P_{-ln u}ψ(x) du`.
pub fn resolvent_by_time_quadrature(psi: &TestFunction, eps: f64, x: &[f64]) -> Result<Estimate> {
    let top = eps.powf(0.25);
    adaptive_gk15(|u| 4.0 * u.powi(3) * ou_apply(psi, -u.ln(), x, 48), 0.0, top, 1e-13, 1e-13, 2000)
}

/// `g(t) = ∫ ψ² P_tf dγ` on a grid, the `t → ∞` limit, and the resulting
/// admissibility scale `1/√(1.05·max g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub scale: f64,
    pub bound: f64,
    /// Largest sampled `g(t)` and where it occurred (`None` for `t = ∞`).
    pub max_value: f64,
    pub argmax: Option<f64>,
    pub grid: TimeGrid,
    pub safety_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { start: 0.0, step: 0.1, points: 101 }
    }
}

impl TimeGrid {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.start + i as f64 * self.step)
    }
}

pub const NORMALIZATION_SAFETY: f64 = 1.05;

pub fn normalize_for_r(mix: &GaussianMixture, psi: &TestFunction, grid: &TimeGrid) -> Result<Normalization> {
    let unit = psi.clone().with_scale(1.0);
    let mut max_value = unit.gamma_second_moment()?;
    let mut argmax = None;
    for t in grid.times() {
        let g = unit.second_moment(&evolve_mixture(mix, t))?;
        if g > max_value {
            max_value = g;
            argmax = Some(t);
        }
    }
    let bound = NORMALIZATION_SAFETY * max_value;
    Ok(Normalization {
        scale: 1.0 / bound.sqrt(),
        bound,
        max_value,
        argmax,
        grid: *grid,
        safety_factor: NORMALIZATION_SAFETY,
    })
}

/// `∫ [xφ - ∇φ] dμ` for a class-B sinusoid, from the Fourier defect.
pub fn sinusoid_defect(mix: &GaussianMixture, phi: &TestFunction) -> Result<Vec<f64>> {
    let TestFunctionKind::Sinusoid { lambda, phase } = &phi.kind else {
        return Err(Error::UnsupportedKind("class-B defect"));
    };
    // c sin(λ·x + θ) = c Im(e^{iθ} e^{iλ·x}).
    let rot = C64::from_polar(1.0, *phase);
    Ok(fourier_defect(mix, lambda).into_iter().map(|g| phi.scale * (rot * g).im).collect())
}

/// `Lφ - 4φ` for a sinusoid, with `L = Δ - x·∇`:
/// `Lφ = -c|λ|² sin(λ·x+θ) - c(λ·x) cos(λ·x+θ)`.
pub fn sinusoid_generator_gap(phi: &TestFunction, x: &[f64]) -> Result<f64> {
    let TestFunctionKind::Sinusoid { lambda, phase } = &phi.kind else {
        return Err(Error::UnsupportedKind("generator of a sinusoid"));
    };
    let lx = dot(lambda, x);
    let (s, c) = (lx + phase).sin_cos();
    let l2 = dot(lambda, lambda);
    Ok(phi.scale * (-l2 * s - lx * c - 4.0 * s))
}

pub(crate) const COS_PHASE: f64 = FRAC_PI_2;

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(var: f64) -> GaussianMixture {
        GaussianMixture::gaussian_1d(0.0, var).unwrap()
    }

    #[test]
    fn sinusoid_scale_and_defect() {
        let phi = TestFunction::sinusoid(vec![0.5], 0.0);
        assert_eq!(phi.scale, 1.0);
        let v = sinusoid_defect(&gauss(4.0), &phi).unwrap();
        assert!((v[0] - 1.5 * (-0.5f64).exp()).abs() < 1e-15);
        let phi = TestFunction::sinusoid(vec![3.0], 0.0);
        assert!((phi.scale - 1.0 / 9.0).abs() < 1e-15);
        assert!(phi.class_b_certificate().unwrap().admissible());
    }

    #[test]
    fn sinusoid_defect_matches_quadrature() {
        let mix = crate::corpus::by_name("mix2d").unwrap().density.as_mixture().unwrap().clone();
        let phi = TestFunction::sinusoid(vec![0.7, -1.1], COS_PHASE);
        let closed = sinusoid_defect(&mix, &phi).unwrap();
        let TestFunctionKind::Sinusoid { lambda, phase } = phi.kind.clone() else { unreachable!() };
        let nodes = NodeSet::mixture_quadrature(&mix, 64);
        let num = nodes.sum_vec(2, |x, out| {
            let a = lambda[0] * x[0] + lambda[1] * x[1] + phase;
            for j in 0..2 {
                out[j] = phi.scale * (x[j] * a.sin() - lambda[j] * a.cos());
            }
        });
        for j in 0..2 {
            assert!((closed[j] - num[j]).abs() < 1e-12, "{closed:?} {num:?}");
        }
    }

    #[test]
    fn hermite_eigen_factors() {
        assert_eq!(hermite_resolvent_factor(0, 1.0), 1.0);
        assert!((hermite_resolvent_factor(2, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        for k in 0..=6 {
            for eps in [1.0, 0.5, 0.1] {
                let psi = TestFunction::hermite(vec![k]);
                let r = resolvent(&psi, eps).unwrap();
                let x = [0.7];
                let direct = resolvent_by_time_quadrature(&psi, eps, &x).unwrap();
                assert!((r.eval(&x) - direct.value).abs() < 1e-10, "k={k} eps={eps}");
            }
        }
    }

    #[test]
    fn fourier_resolvent_matches_time_quadrature() {
        for part in [Part::Re, Part::Im] {
            let psi = TestFunction::fourier(vec![1.3], part);
            let r = resolvent(&psi, 1.0).unwrap();
            for x in [0.0, 0.8] {
                let direct = resolvent_by_time_quadrature(&psi, 1.0, &[x]).unwrap();
                assert!((r.eval(&[x]) - direct.value).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fourier_defect_matches_quadrature() {
        let mix = crate::corpus::by_name("asym3").unwrap().density.as_mixture().unwrap().clone();
        let psi = TestFunction::fourier(vec![0.9], Part::Re);
        let r = resolvent(&psi, 0.5).unwrap();
        let closed = r.stein_defect(&mix)[0];
        // φ' by central differences of the pointwise resolvent.
        let nodes = NodeSet::mixture_quadrature(&mix, 64);
        let h = 1e-5;
        let num = nodes.sum(|x| x[0] * r.eval(x) - (r.eval(&[x[0] + h]) - r.eval(&[x[0] - h])) / (2.0 * h));
        assert!((closed - num).abs() < 1e-8, "{closed} vs {num}");
    }

    #[test]
    fn normalization_examples() {
        let grid = TimeGrid::default();
        let n = normalize_for_r(&gauss(0.5), &TestFunction::hermite(vec![1]), &grid).unwrap();
        assert!((n.bound - 1.05).abs() < 1e-12);
        assert!((n.scale - 0.975_900_072_948_533).abs() < 1e-12);
        let n = normalize_for_r(&gauss(4.0), &TestFunction::hermite(vec![1]), &grid).unwrap();
        assert!((n.bound - 4.2).abs() < 1e-12);
        let n = normalize_for_r(&gauss(4.0), &TestFunction::hermite(vec![0]), &grid).unwrap();
        assert!((n.scale - 1.0 / 1.05f64.sqrt()).abs() < 1e-12);
    }
}
