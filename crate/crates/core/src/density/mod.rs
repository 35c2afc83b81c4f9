//! Densities relative to the standard Gaussian `γ`.
//!
//! A [`RelativeDensity`] is `f = dμ/dγ` for a probability `μ` on `R^n`, backed
//! either by a [`GaussianMixture`] (the canonical family, closed under the
//! Ornstein–Uhlenbeck flow) or by a [`Tabulated1D`] Lebesgue density.

mod mixture;
mod spec;
mod tabulated;

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

pub use mixture::{Component, GaussianMixture, MixtureEval};
pub use spec::{ComponentSpec, DensitySpec};
pub(crate) use tabulated::simpson_irregular;
pub use tabulated::Tabulated1D;

use crate::{Error, Result};

/// Barycenter, covariance and second moment of `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub barycenter: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// `∫|x|² dμ`.
    pub second_moment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backing {
    Mixture(GaussianMixture),
    Tabulated(Tabulated1D),
}

/// `f = dμ/dγ` with pointwise accessors and compute-once cached moments.
#[derive(Debug, Clone)]
pub struct RelativeDensity {
    backing: Backing,
    moments: OnceLock<Moments>,
    eval: OnceLock<MixtureEval>,
}

impl From<GaussianMixture> for RelativeDensity {
    fn from(m: GaussianMixture) -> Self {
        Self::new(Backing::Mixture(m))
    }
}

impl From<Tabulated1D> for RelativeDensity {
    fn from(t: Tabulated1D) -> Self {
        Self::new(Backing::Tabulated(t))
    }
}

impl PartialEq for RelativeDensity {
    fn eq(&self, other: &Self) -> bool {
        self.backing == other.backing
    }
}

impl RelativeDensity {
    pub fn new(backing: Backing) -> Self {
        Self { backing, moments: OnceLock::new(), eval: OnceLock::new() }
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    pub fn dim(&self) -> usize {
        match &self.backing {
            Backing::Mixture(m) => m.dim(),
            Backing::Tabulated(_) => 1,
        }
    }

    pub fn as_mixture(&self) -> Option<&GaussianMixture> {
        match &self.backing {
            Backing::Mixture(m) => Some(m),
            Backing::Tabulated(_) => None,
        }
    }

    /// The backing mixture, or an unsupported-family error naming `what`.
    pub fn mixture(&self, what: &'static str) -> Result<&GaussianMixture> {
        self.as_mixture().ok_or(Error::UnsupportedFamily(what))
    }

    pub fn as_tabulated(&self) -> Option<&Tabulated1D> {
        match &self.backing {
            Backing::Tabulated(t) => Some(t),
            Backing::Mixture(_) => None,
        }
    }

    fn evaluator(&self) -> Option<&MixtureEval> {
        self.as_mixture().map(|m| self.eval.get_or_init(|| m.evaluator()))
    }

    /// `ln f(x)`.
    pub fn log_value(&self, x: &[f64]) -> f64 {
        match &self.backing {
            Backing::Mixture(_) => self.evaluator().unwrap().log_relative(x),
            Backing::Tabulated(t) => t.log_relative(x[0]),
        }
    }

    /// `f(x) >= 0`.
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.backing {
            Backing::Mixture(_) => self.evaluator().unwrap().relative(x),
            Backing::Tabulated(t) => t.relative(x[0]),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        match &self.backing {
            Backing::Mixture(_) => {
                let mut out = vec![0.0; self.dim()];
                self.evaluator().unwrap().grad_relative(x, &mut out);
                DVector::from_vec(out)
            }
            Backing::Tabulated(t) => DVector::from_element(1, t.relative_derivatives(x[0])[1]),
        }
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        match &self.backing {
            Backing::Mixture(_) => {
                let mut out = vec![0.0; n * n];
                self.evaluator().unwrap().hess_relative(x, &mut out);
                DMatrix::from_row_slice(n, n, &out)
            }
            Backing::Tabulated(t) => DMatrix::from_element(1, 1, t.relative_derivatives(x[0])[2]),
        }
    }

    /// `Δf(x)`.
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        self.hessian(x).trace()
    }

    pub fn moments(&self) -> &Moments {
        self.moments.get_or_init(|| match &self.backing {
            Backing::Mixture(m) => {
                Moments { barycenter: m.mean(), covariance: m.covariance(), second_moment: m.second_moment() }
            }
            Backing::Tabulated(t) => Moments {
                barycenter: DVector::from_element(1, t.mean()),
                covariance: DMatrix::from_element(1, 1, t.variance()),
                second_moment: t.second_moment(),
            },
        })
    }

    pub fn barycenter(&self) -> &DVector<f64> {
        &self.moments().barycenter
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.moments().covariance
    }

    pub fn second_moment(&self) -> f64 {
        self.moments().second_moment
    }

    /// Barycenter within `tol` of the origin.
    pub fn is_centered(&self, tol: f64) -> bool {
        self.barycenter().norm() <= tol
    }

    pub(crate) fn require_centered(&self, what: &str) -> Result<()> {
        if self.is_centered(CENTERING_TOL) {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "{what} needs a centered density (barycenter norm {:.3e})",
                self.barycenter().norm()
            )))
        }
    }
}

/// Barycenter norm below which a density counts as centered.
pub const CENTERING_TOL: f64 = 1e-9;

/// The extremal `e_b(x) = exp(b·x - |b|²/2)`, i.e. the Gaussian `N(b, Id)`.
pub fn make_extremal(b: &[f64]) -> RelativeDensity {
    let n = b.len();
    GaussianMixture::gaussian(DVector::from_column_slice(b), DMatrix::identity(n, n))
        .expect("N(b, Id) is a valid mixture")
        .into()
}

/// Barycenter `b` and covariance `Γ` of `μ`.
pub fn barycenter_covariance(d: &RelativeDensity) -> (DVector<f64>, DMatrix<f64>) {
    let m = d.moments();
    (m.barycenter.clone(), m.covariance.clone())
}

/// `f_b(x) = f(x + b) exp(-(b·x + |b|²/2))`: the law of `X - b`.
pub fn recenter(d: &RelativeDensity) -> RelativeDensity {
    let b = d.barycenter().clone();
    match d.backing() {
        Backing::Mixture(m) => m.translated(&(-b)).into(),
        Backing::Tabulated(t) => t.translated(-b[0]).into(),
    }
}
