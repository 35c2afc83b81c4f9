//! Numerical laboratory for the deficit in the Gaussian logarithmic Sobolev
//! inequality.
//!
//! Densities are taken relative to the standard Gaussian `γ` on `R^n`. The
//! canonical family is the Gaussian mixture, which the Ornstein–Uhlenbeck
//! semigroup maps to Gaussian mixtures exactly, so every time-evolution
//! quantity below is computed without discretizing the flow.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`density`] | mixtures, tabulated 1-D densities, extremals, recentering, JSON specs |
//! | [`ou`] | exact OU evolution, posterior `E(X \| X_t)`, `Cov(X \| X_t)`, MMSE |
//! | [`functionals`] | entropy, Fisher information, deficit (two routes), decay facts |
//! | [`stein`] | Stein kernels, discrepancy, certified lower bounds on Stein functionals |
//! | [`transport`] | Wasserstein-2 in 1-D and between Gaussians, the W2 flow |
//! | [`bounds`] | inequality catalog as machine-checked necessary conditions |
//! | [`numerics`] | Gauss–Hermite / Gauss–Legendre / Gauss–Kronrod engines, time scheme |
//! | [`report`] | run reports, JSON/CSV writers used by the `lsi-lab` binary |
//!
//! ```
//! use lsi_lab::density::{GaussianMixture, RelativeDensity};
//! use lsi_lab::functionals;
//! use lsi_lab::numerics::QuadratureConfig;
//!
//! let d = RelativeDensity::from(GaussianMixture::gaussian_1d(0.0, 4.0).unwrap());
//! let report = functionals::deficit(&d, &QuadratureConfig::default()).unwrap();
//! assert!((report.deficit - (2.25 / 2.0 - (1.5 - 2f64.ln()))).abs() < 1e-10);
//! ```

pub mod bounds;
pub mod corpus;
pub mod density;
mod error;
pub mod functionals;
pub(crate) mod linalg;
pub mod numerics;
pub mod ou;
pub mod report;
pub mod stein;
pub mod transport;

pub use error::{Error, Result};
