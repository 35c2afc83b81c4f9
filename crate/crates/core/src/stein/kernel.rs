use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::density::{Backing, RelativeDensity, Tabulated1D};
use crate::numerics::{expect_mixture, Estimate, QuadratureConfig};
use crate::{Error, Result};

/// Log density below which the kernel ratio is not evaluated.
const LOG_DENSITY_FLOOR: f64 = -690.0;
/// Relative density level below which tabulated nodes are outside the domain.
const TABULATED_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum KernelRepr {
    /// `(weight, mean, variance)` per component.
    Mixture(Vec<(f64, f64, f64)>),
    /// Kernel values on the grid, `NaN` outside the domain of validity.
    Tabulated { grid: Vec<f64>, tau: Vec<f64> },
}

/// The one-dimensional Stein kernel `τ(x) = (1/p(x)) ∫_x^∞ y p(y) dy` of a
/// centered law with Lebesgue density `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinKernel1D {
    repr: KernelRepr,
    validity: (f64, f64),
}

fn log_normal_pdf(x: f64, m: f64, var: f64) -> f64 {
    -0.5 * (x - m).powi(2) / var - 0.5 * (2.0 * PI * var).ln()
}

impl SteinKernel1D {
    /// Interval on which `τ` is evaluated reliably.
    pub fn validity(&self) -> (f64, f64) {
        self.validity
    }

    /// `τ(x)`; `NaN` outside [`SteinKernel1D::validity`].
    pub fn value(&self, x: f64) -> f64 {
        match &self.repr {
            KernelRepr::Mixture(comps) => mixture_kernel(comps, x),
            KernelRepr::Tabulated { grid, tau } => {
                if x < self.validity.0 || x > self.validity.1 {
                    return f64::NAN;
                }
                let i = grid.partition_point(|g| *g <= x).saturating_sub(1).min(grid.len() - 2);
                let u = (x - grid[i]) / (grid[i + 1] - grid[i]);
                (1.0 - u) * tau[i] + u * tau[i + 1]
            }
        }
    }
}

/// For `x >= 0`: `Σ w_k (m_k S_k(x) + s_k² p_k(x)) / p(x)`; for `x < 0` the
/// centered form `Σ w_k (s_k² p_k(x) - m_k F_k(x)) / p(x)`, which avoids
/// subtracting two nearly equal tail integrals.
fn mixture_kernel(comps: &[(f64, f64, f64)], x: f64) -> f64 {
    let logs: Vec<f64> = comps.iter().map(|&(w, m, v)| w.ln() + log_normal_pdf(x, m, v)).collect();
    let lmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_p = lmax + logs.iter().map(|l| (l - lmax).exp()).sum::<f64>().ln();
    if log_p < LOG_DENSITY_FLOOR {
        return f64::NAN;
    }
    let mut num = 0.0;
    for (&(w, m, v), l) in comps.iter().zip(&logs) {
        let z = (x - m) / (v.sqrt() * SQRT_2);
        let density_term = v * (l - log_p).exp();
        let tail = if x >= 0.0 { m * 0.5 * erfc(z) } else { -m * 0.5 * erfc(-z) };
        num += density_term + w * tail * (-log_p).exp();
    }
    num
}

fn tabulated_kernel(t: &Tabulated1D) -> SteinKernel1D {
    let grid = t.grid().to_vec();
    let n = grid.len();
    // Simpson per interval, with the spline midpoint, for ∫ y p(y) dy.
    let piece = |i: usize| {
        let (a, b) = (grid[i], grid[i + 1]);
        let mid = 0.5 * (a + b);
        let f = |y: f64| y * t.derivatives(y)[0];
        (b - a) / 6.0 * (f(a) + 4.0 * f(mid) + f(b))
    };
    let pieces: Vec<f64> = (0..n - 1).map(piece).collect();
    let mut left = vec![0.0; n];
    for i in 1..n {
        left[i] = left[i - 1] + pieces[i - 1];
    }
    let mut right = vec![0.0; n];
    for i in (0..n - 1).rev() {
        right[i] = right[i + 1] + pieces[i];
    }
    let pmax = t.values().iter().copied().fold(0.0, f64::max);
    let floor = TABULATED_FLOOR * pmax;
    let mut tau = vec![f64::NAN; n];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let p = t.values()[i];
        if p <= floor {
            continue;
        }
        tau[i] = if grid[i] >= 0.0 { right[i] / p } else { -left[i] / p };
        lo = lo.min(grid[i]);
        hi = hi.max(grid[i]);
    }
    SteinKernel1D { repr: KernelRepr::Tabulated { grid, tau }, validity: (lo, hi) }
}

/// Stein kernel of a one-dimensional centered density.
pub fn stein_kernel_1d(d: &RelativeDensity) -> Result<SteinKernel1D> {
    if d.dim() != 1 {
        return Err(Error::UnsupportedFamily("one-dimensional Stein kernel"));
    }
    d.require_centered("the Stein kernel")?;
    match d.backing() {
        Backing::Mixture(m) => {
            let comps: Vec<(f64, f64, f64)> =
                m.components().iter().map(|c| (c.weight(), c.mean()[0], c.cov()[(0, 0)])).collect();
            let lo = comps.iter().map(|&(_, m, v)| m - 35.0 * v.sqrt()).fold(f64::INFINITY, f64::min);
            let hi = comps.iter().map(|&(_, m, v)| m + 35.0 * v.sqrt()).fold(f64::NEG_INFINITY, f64::max);
            Ok(SteinKernel1D { repr: KernelRepr::Mixture(comps), validity: (lo, hi) })
        }
        Backing::Tabulated(t) => Ok(tabulated_kernel(t)),
    }
}

/// How a discrepancy was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscrepancyMethod {
    /// `τ = Σ` for a centered Gaussian, so `S = |Σ - Id|_HS`.
    GaussianClosedForm,
    KernelQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub value: f64,
    pub error: f64,
    pub method: DiscrepancyMethod,
}

/// `S(μ | γ) = (∫ |τ_μ - Id|² dμ)^{1/2}` for centered `μ`: one-dimensional
/// laws through the kernel, Gaussians in any dimension in closed form.
pub fn stein_discrepancy(d: &RelativeDensity, cfg: &QuadratureConfig) -> Result<Discrepancy> {
    d.require_centered("the Stein discrepancy")?;
    if let Some(m) = d.as_mixture() {
        if m.is_single_gaussian() {
            let dev = m.components()[0].cov_dev();
            return Ok(Discrepancy { value: dev.norm(), error: 0.0, method: DiscrepancyMethod::GaussianClosedForm });
        }
    }
    if d.dim() != 1 {
        return Err(Error::UnsupportedFamily("Stein discrepancy of a non-Gaussian law in dimension n >= 2"));
    }
    let kernel = stein_kernel_1d(d)?;
    let sq = match d.backing() {
        Backing::Mixture(m) => expect_mixture(m, cfg, |x| (kernel.value(x[0]) - 1.0).powi(2))?,
        Backing::Tabulated(t) => {
            let ys: Vec<f64> = t
                .grid()
                .iter()
                .zip(t.values())
                .map(|(x, p)| {
                    let tau = kernel.value(*x);
                    if tau.is_nan() {
                        0.0
                    } else {
                        (tau - 1.0).powi(2) * p
                    }
                })
                .collect();
            Estimate::new(crate::density::simpson_irregular(t.grid(), &ys), 0.0)
        }
    };
    if !sq.value.is_finite() {
        return Err(Error::ToleranceExceeded {
            what: "Stein discrepancy",
            achieved: f64::INFINITY,
            tolerance: cfg.tol,
        });
    }
    let value = sq.value.max(0.0).sqrt();
    // d√v = dv / (2√v), capped by √dv near zero.
    let error = if value > 0.0 { (sq.error / (2.0 * value)).min(sq.error.sqrt()) } else { sq.error.sqrt() };
    Ok(Discrepancy { value, error, method: DiscrepancyMethod::KernelQuadrature })
}
