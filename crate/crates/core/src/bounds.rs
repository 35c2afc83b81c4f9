//! The inequality catalog: each lower bound on the deficit as a checkable
//! necessary condition on a concrete density.
//!
//! Every check is written `lhs >= rhs`. Stein functionals appearing on the
//! right are certified lower bounds, so replacing the true supremum by them
//! can only increase the slack; a reported failure therefore always points
//! at a numerical or implementation problem.

use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{recenter, RelativeDensity};
use crate::functionals::{self, FunctionalReport};
use crate::linalg::{power_iteration, sup_quadratic};
use crate::numerics::{Estimate, QuadratureConfig, TimeQuadrature};
use crate::stein::{self, Discrepancy, ResolventFamily, SteinFunctionalEstimate, TimeGrid};
use crate::transport::{self, W2Result};
use crate::{Error, Result};

/// Relative rounding allowance added to every error budget.
pub const ROUNDING_FLOOR: f64 = 1e-10;
/// Tolerance on `Γ <= Id` and `∫|x|²dμ <= n`.
const PRECONDITION_TOL: f64 = 1e-12;
const COV_EPS_VALUES: [f64; 3] = [0.1, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Lsi,
    Thm1Bis,
    Thm1,
    CovEps(u8),
    CovEpsAdaptive,
    Bgrs,
    Fd,
    SteinW2,
    SteinW2Improved,
    Hsi,
    DimLsi,
    DLeS,
    CovFromDeficit,
}

impl Check {
    /// Every check, in report order.
    pub fn catalog() -> Vec<Check> {
        let mut v = vec![Check::Lsi, Check::Thm1Bis, Check::Thm1];
        v.extend((0..COV_EPS_VALUES.len() as u8).map(Check::CovEps));
        v.extend([
            Check::CovEpsAdaptive,
            Check::Bgrs,
            Check::Fd,
            Check::SteinW2,
            Check::SteinW2Improved,
            Check::Hsi,
            Check::DimLsi,
            Check::DLeS,
            Check::CovFromDeficit,
        ]);
        v
    }

    pub fn name(&self) -> String {
        match self {
            Check::Lsi => "LSI".into(),
            Check::Thm1Bis => "THM1BIS".into(),
            Check::Thm1 => "THM1".into(),
            Check::CovEps(i) => format!("COV_EPS[eps={}]", COV_EPS_VALUES[*i as usize]),
            Check::CovEpsAdaptive => "COV_EPS[eps=adaptive]".into(),
            Check::Bgrs => "BGRS".into(),
            Check::Fd => "FD".into(),
            Check::SteinW2 => "STEIN_W2".into(),
            Check::SteinW2Improved => "STEIN_W2_IMPROVED".into(),
            Check::Hsi => "HSI".into(),
            Check::DimLsi => "DIM_LSI".into(),
            Check::DLeS => "D_LE_S".into(),
            Check::CovFromDeficit => "COV_FROM_DEFICIT".into(),
        }
    }

    /// Statement checked, as `lhs >= rhs`.
    pub fn statement(&self) -> &'static str {
        match self {
            Check::Lsi => "delta >= 0",
            Check::Thm1Bis => "delta >= D~(mu_b)^4 / 4, when Gamma <= Id",
            Check::Thm1 => "delta >= D(mu_b)^4 / (64 (1 + I(f_b))^2), when Gamma <= Id",
            Check::CovEps(_) => "2 delta + eps |Gamma - Id|^2 >= D~_eps(mu_b)^4 / (4 eps^3)",
            Check::CovEpsAdaptive => {
                "2 delta + eps |Gamma - Id|^2 >= D~_eps(mu_b)^4 / (4 eps^3), eps = min(1, delta / |Gamma - Id|^2)"
            }
            Check::Bgrs => "delta >= W2(mu, gamma)^4 / (4n), when E|X|^2 <= n",
            Check::Fd => "delta >= (1/n) int_0^inf I(P_t f)^2 dt, when E|X|^2 <= n",
            Check::SteinW2 => "delta >= W2(mu_b, gamma)^4 / (4 S^2)",
            Check::SteinW2Improved => "delta >= S^2 log(1 / cos(W2 / S))^2, when W2 <= S",
            Check::Hsi => "(S^2 / 2) log(1 + I / S^2) >= H",
            Check::DimLsi => "(1/2) L + (n/2) log(1 + (I - L)/n) >= H, L = E|X|^2 - n",
            Check::DLeS => "S >= D(mu_b)",
            Check::CovFromDeficit => "delta >= exp(-4 t0) |Gamma - Id|^2 / 16",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase();
        Check::catalog()
            .into_iter()
            .find(|c| c.name().to_ascii_uppercase() == norm)
            .or(match norm.as_str() {
                "COV_EPS" => Some(Check::CovEps(2)),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown check {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    PreconditionNotMet,
}

/// Outcome of one check on one density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    pub check: String,
    pub statement: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    pub error_budget: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec_hash: Option<String>,
}

impl SlackReport {
    fn compared(check: Check, lhs: f64, rhs: f64, budget: f64, note: Option<String>) -> Self {
        let slack = lhs - rhs;
        let error_budget = budget + ROUNDING_FLOOR * lhs.abs().max(rhs.abs()).max(1.0);
        let verdict = if slack < -error_budget { Verdict::Fail } else { Verdict::Pass };
        Self {
            check: check.name(),
            statement: check.statement().into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            slack: Some(slack),
            error_budget,
            verdict,
            note,
            spec_hash: None,
        }
    }

    fn skipped(check: Check, why: impl Into<String>) -> Self {
        Self {
            check: check.name(),
            statement: check.statement().into(),
            lhs: None,
            rhs: None,
            slack: None,
            error_budget: 0.0,
            verdict: Verdict::PreconditionNotMet,
            note: Some(why.into()),
            spec_hash: None,
        }
    }
}

/// Settings shared by every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub quadrature: QuadratureConfig,
    pub time: TimeQuadrature,
    /// Grid for the resolvent normalization `sup_t ∫ψ²P_tf dγ`.
    pub normalization_grid: TimeGrid,
    pub resolvent_family: ResolventFamily,
    /// Keep every `k`-th member of the class-B family (1 keeps all).
    #[serde(default = "one")]
    pub sinusoid_stride: usize,
}

fn one() -> usize {
    1
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self::new(QuadratureConfig::default(), TimeQuadrature::default())
    }
}

impl BoundsConfig {
    pub fn new(quadrature: QuadratureConfig, time: TimeQuadrature) -> Self {
        Self {
            quadrature,
            time,
            normalization_grid: TimeGrid::default(),
            resolvent_family: ResolventFamily::default(),
            sinusoid_stride: 1,
        }
    }
}

/// Internal outcome of evaluating a check body.
enum Outcome {
    Compared { lhs: f64, rhs: f64, budget: f64, note: Option<String> },
    Skip(String),
}

fn cmp(lhs: f64, rhs: f64, budget: f64) -> Result<Outcome> {
    Ok(Outcome::Compared { lhs, rhs, budget, note: None })
}

fn skip(why: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome::Skip(why.into()))
}

/// Maps "this quantity is not available for this family" to a skip.
fn available<T>(r: Result<T>) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ (Error::UnsupportedFamily(_) | Error::Precondition(_) | Error::UnsupportedKind(_))) => {
            Ok(Err(e.to_string()))
        }
        Err(e) => Err(e),
    }
}

/// Compute-once storage of the quantities shared between checks.
struct Context<'a> {
    d: &'a RelativeDensity,
    cfg: &'a BoundsConfig,
    centered: OnceLock<RelativeDensity>,
    report: OnceLock<FunctionalReport>,
    report_b: OnceLock<FunctionalReport>,
    stein: OnceLock<std::result::Result<Discrepancy, String>>,
    w2: OnceLock<W2Result>,
    w2_b: OnceLock<W2Result>,
    d_est: OnceLock<SteinFunctionalEstimate>,
    dtilde: Mutex<Vec<(u64, SteinFunctionalEstimate)>>,
}

/// `OnceLock::get_or_try_init` for a deterministic computation; a race only
/// duplicates work.
fn cached<T>(cell: &OnceLock<T>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = f()?;
    Ok(cell.get_or_init(|| v))
}

impl<'a> Context<'a> {
    fn new(d: &'a RelativeDensity, cfg: &'a BoundsConfig) -> Self {
        Self {
            d,
            cfg,
            centered: OnceLock::new(),
            report: OnceLock::new(),
            report_b: OnceLock::new(),
            stein: OnceLock::new(),
            w2: OnceLock::new(),
            w2_b: OnceLock::new(),
            d_est: OnceLock::new(),
            dtilde: Mutex::new(Vec::new()),
        }
    }

    fn q(&self) -> &QuadratureConfig {
        &self.cfg.quadrature
    }

    fn centered(&self) -> &RelativeDensity {
        self.centered.get_or_init(|| recenter(self.d))
    }

    fn report(&self) -> Result<&FunctionalReport> {
        cached(&self.report, || functionals::deficit(self.d, self.q()))
    }

    fn report_b(&self) -> Result<&FunctionalReport> {
        cached(&self.report_b, || functionals::deficit(self.centered(), self.q()))
    }

    fn dim(&self) -> f64 {
        self.d.dim() as f64
    }

    /// `‖Γ - Id‖ = sup_{|α|=1} (Γ - Id)α·α`.
    fn cov_gap(&self) -> f64 {
        let n = self.d.dim();
        sup_quadratic(&(self.d.covariance() - nalgebra::DMatrix::identity(n, n)))
    }

    fn stein(&self) -> Result<&std::result::Result<Discrepancy, String>> {
        cached(&self.stein, || available(stein::stein_discrepancy(self.centered(), self.q())))
    }

    fn w2(&self) -> Result<&W2Result> {
        cached(&self.w2, || transport::w2_to_gamma(self.d, self.q()))
    }

    fn w2_b(&self) -> Result<&W2Result> {
        cached(&self.w2_b, || transport::w2_to_gamma(self.centered(), self.q()))
    }

    fn d_est(&self) -> Result<&SteinFunctionalEstimate> {
        cached(&self.d_est, || {
            let family: Vec<_> =
                stein::sinusoid_family(self.d.dim()).into_iter().step_by(self.cfg.sinusoid_stride.max(1)).collect();
            stein::d_lower_bound(self.centered(), &family)
        })
    }

    fn dtilde(&self, eps: f64) -> Result<SteinFunctionalEstimate> {
        let key = eps.to_bits();
        if let Some((_, v)) = self.dtilde.lock().expect("cache lock").iter().find(|(k, _)| *k == key) {
            return Ok(v.clone());
        }
        let members = self.cfg.resolvent_family.members(self.d.dim());
        let v = stein::dtilde_lower_bound(self.centered(), &members, eps, &self.cfg.normalization_grid)?;
        self.dtilde.lock().expect("cache lock").push((key, v.clone()));
        Ok(v)
    }

    fn run(&self, check: Check) -> Result<SlackReport> {
        let outcome = match check {
            Check::Lsi => self.lsi(),
            Check::Thm1Bis => self.thm1bis(),
            Check::Thm1 => self.thm1(),
            Check::CovEps(i) => self.cov_eps(COV_EPS_VALUES[i as usize], None),
            Check::CovEpsAdaptive => self.cov_eps_adaptive(),
            Check::Bgrs => self.bgrs(),
            Check::Fd => self.fd(),
            Check::SteinW2 => self.stein_w2(false),
            Check::SteinW2Improved => self.stein_w2(true),
            Check::Hsi => self.hsi(),
            Check::DimLsi => self.dim_lsi(),
            Check::DLeS => self.d_le_s(),
            Check::CovFromDeficit => self.cov_from_deficit(),
        }?;
        Ok(match outcome {
            Outcome::Compared { lhs, rhs, budget, note } => SlackReport::compared(check, lhs, rhs, budget, note),
            Outcome::Skip(why) => SlackReport::skipped(check, why),
        })
    }

    fn lsi(&self) -> Result<Outcome> {
        let r = self.report()?;
        cmp(r.deficit, 0.0, r.error_budget.deficit)
    }

    fn covariance_below_identity(&self) -> bool {
        self.cov_gap() <= PRECONDITION_TOL
    }

    fn dtilde_available(&self, eps: f64) -> Result<std::result::Result<SteinFunctionalEstimate, String>> {
        available(self.dtilde(eps))
    }

    fn thm1bis(&self) -> Result<Outcome> {
        if !self.covariance_below_identity() {
            return skip(format!("covariance is not below the identity (|Gamma - Id| = {:.6e})", self.cov_gap()));
        }
        let dt = match self.dtilde_available(1.0)? {
            Ok(v) => v,
            Err(why) => return skip(why),
        };
        let r = self.report()?;
        cmp(r.deficit, 0.25 * dt.value.powi(4), r.error_budget.deficit)
    }

    fn thm1(&self) -> Result<Outcome> {
        if !self.covariance_below_identity() {
            return skip(format!("covariance is not below the identity (|Gamma - Id| = {:.6e})", self.cov_gap()));
        }
        let r = self.report()?;
        let rb = self.report_b()?;
        let d = self.d_est()?.value;
        cmp(r.deficit, d.powi(4) / (64.0 * (1.0 + rb.fisher).powi(2)), r.error_budget.deficit)
    }

    fn cov_eps(&self, eps: f64, note: Option<String>) -> Result<Outcome> {
        let dt = match self.dtilde_available(eps)? {
            Ok(v) => v,
            Err(why) => return skip(why),
        };
        let r = self.report()?;
        let gap = self.cov_gap();
        Ok(Outcome::Compared {
            lhs: 2.0 * r.deficit + eps * gap * gap,
            rhs: dt.value.powi(4) / (4.0 * eps.powi(3)),
            budget: 2.0 * r.error_budget.deficit,
            note,
        })
    }

    fn cov_eps_adaptive(&self) -> Result<Outcome> {
        let r = self.report()?;
        let budget = r.error_budget.deficit + ROUNDING_FLOOR;
        if r.deficit <= 10.0 * budget {
            return skip(format!("deficit {:.3e} is indistinguishable from zero", r.deficit));
        }
        let gap2 = self.cov_gap().powi(2);
        let eps = if gap2 == 0.0 { 1.0 } else { (r.deficit / gap2).min(1.0) };
        self.cov_eps(eps, Some(format!("eps = {eps:.17e}")))
    }

    fn second_moment_within_dimension(&self) -> bool {
        self.d.second_moment() <= self.dim() + PRECONDITION_TOL
    }

    fn bgrs(&self) -> Result<Outcome> {
        if !self.second_moment_within_dimension() {
            return skip(format!("E|X|^2 = {:.6e} exceeds n", self.d.second_moment()));
        }
        let r = self.report()?;
        let w = self.w2()?;
        let note = Some(format!("W2 method: {:?}", w.method));
        // The right side increases with W2; shrink W2 by its error.
        let w_lo = (w.value - w.error).max(0.0);
        Ok(Outcome::Compared {
            lhs: r.deficit,
            rhs: w_lo.powi(4) / (4.0 * self.dim()),
            budget: r.error_budget.deficit,
            note,
        })
    }

    fn fd(&self) -> Result<Outcome> {
        if !self.second_moment_within_dimension() {
            return skip(format!("E|X|^2 = {:.6e} exceeds n", self.d.second_moment()));
        }
        let r = self.report()?;
        let Some(_) = self.d.as_mixture() else {
            return skip("the Fisher time integral needs a mixture");
        };
        let integral: Estimate = functionals::fisher_squared_integral(self.d, &self.cfg.time, self.q())?;
        cmp(r.deficit, integral.value / self.dim(), r.error_budget.deficit + integral.error / self.dim())
    }

    fn stein_value(&self) -> Result<std::result::Result<Discrepancy, String>> {
        Ok(match self.stein()? {
            Ok(s) if s.value > 1e-12 => Ok(*s),
            Ok(_) => Err("Stein discrepancy vanishes".into()),
            Err(why) => Err(why.clone()),
        })
    }

    fn stein_w2(&self, improved: bool) -> Result<Outcome> {
        let s = match self.stein_value()? {
            Ok(s) => s,
            Err(why) => return skip(why),
        };
        let rb = self.report_b()?;
        let w = self.w2_b()?;
        let w_lo = (w.value - w.error).max(0.0);
        let s_hi = s.value + s.error;
        let note = Some(format!("W2 method: {:?}; S = {:.17e}", w.method, s.value));
        let rhs = if improved {
            if w.value > s.value + 1e-9 {
                return skip(format!("W2 = {:.6e} exceeds S = {:.6e}", w.value, s.value));
            }
            // Increasing in W2 and in S on W2 <= S.
            let s_lo = (s.value - s.error).max(w_lo);
            let c = (w_lo / s_lo).cos();
            s_lo * s_lo * (1.0 / c).ln().powi(2)
        } else {
            w_lo.powi(4) / (4.0 * s_hi * s_hi)
        };
        Ok(Outcome::Compared { lhs: rb.deficit, rhs, budget: rb.error_budget.deficit, note })
    }

    fn hsi(&self) -> Result<Outcome> {
        let s = match self.stein_value()? {
            Ok(s) => s,
            Err(why) => return skip(why),
        };
        let rb = self.report_b()?;
        let s2 = s.value * s.value;
        let lhs = 0.5 * s2 * (1.0 + rb.fisher / s2).ln_1p_safe();
        // d lhs / dI = 1/(2(1 + I/S²)) <= 1/2; d lhs / dS is bounded by 2S log(1 + I/S²).
        let budget = rb.error_budget.entropy
            + 0.5 * rb.error_budget.fisher
            + 2.0 * s.value * s.error * (1.0 + rb.fisher / s2).ln();
        cmp(lhs, rb.entropy, budget)
    }

    fn dim_lsi(&self) -> Result<Outcome> {
        let r = self.report()?;
        let n = self.dim();
        let lap = self.d.second_moment() - n;
        let arg = 1.0 + (r.fisher - lap) / n;
        if arg <= 0.0 {
            return skip(format!("1 + (I - L)/n = {arg:.6e} is not positive"));
        }
        let lhs = 0.5 * lap + 0.5 * n * arg.ln();
        cmp(lhs, r.entropy, r.error_budget.entropy + 0.5 * r.error_budget.fisher / arg)
    }

    fn d_le_s(&self) -> Result<Outcome> {
        let s = match self.stein()? {
            Ok(s) => *s,
            Err(why) => return skip(why.clone()),
        };
        let d = self.d_est()?;
        cmp(s.value, d.value, s.error)
    }

    fn cov_from_deficit(&self) -> Result<Outcome> {
        let gap = self.cov_gap();
        let target = 0.25 * gap * gap;
        if target == 0.0 {
            return skip("covariance equals the identity");
        }
        let c = self.centered();
        if c.as_mixture().is_none() {
            return skip("ρ(t) needs a mixture");
        }
        let times: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
        let premise: Vec<Result<bool>> = times
            .par_iter()
            .map(|&t| {
                let rho = if t == 0.0 {
                    power_iteration(c.covariance(), 1e-10)
                } else {
                    functionals::rho(c, t, self.q())?.value
                };
                Ok(2.0 * (-4.0 * t).exp() + 2.0 * rho <= target)
            })
            .collect();
        let premise: Vec<bool> = premise.into_iter().collect::<Result<_>>()?;
        // First grid time from which the premise holds on the rest of the grid.
        let mut t0 = None;
        for (i, t) in times.iter().enumerate().rev() {
            if premise[i] {
                t0 = Some(*t);
            } else {
                break;
            }
        }
        let Some(t0) = t0 else {
            return skip("premise 2e^{-4t} + 2 rho(t) <= |Gamma - Id|^2 / 4 fails at t = 10");
        };
        let r = self.report()?;
        Ok(Outcome::Compared {
            lhs: r.deficit,
            rhs: (-4.0 * t0).exp() / 16.0 * gap * gap,
            budget: r.error_budget.deficit,
            note: Some(format!("t0 = {t0}")),
        })
    }
}

trait Ln1pSafe {
    fn ln_1p_safe(self) -> f64;
}

impl Ln1pSafe for f64 {
    /// `ln(x)` computed as `ln_1p(x - 1)` to keep accuracy for `x` near 1.
    fn ln_1p_safe(self) -> f64 {
        (self - 1.0).ln_1p()
    }
}

/// Runs one check.
pub fn verify(check: Check, d: &RelativeDensity, cfg: &BoundsConfig) -> Result<SlackReport> {
    Context::new(d, cfg).run(check)
}

/// Runs the whole catalog, concurrently, sharing intermediate quantities.
pub fn verify_all(d: &RelativeDensity, cfg: &BoundsConfig) -> Result<Vec<SlackReport>> {
    let ctx = Context::new(d, cfg);
    // Warm the shared quantities once before fanning out.
    ctx.report()?;
    Check::catalog().par_iter().map(|c| ctx.run(*c)).collect()
}

/// `θ(r) = r - log(1 + r)`, the gap in `log(1 + r) <= r`.
pub fn theta(r: f64) -> f64 {
    r - r.ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_extremal, GaussianMixture};

    fn gauss(var: f64) -> RelativeDensity {
        GaussianMixture::gaussian_1d(0.0, var).unwrap().into()
    }

    fn cfg() -> BoundsConfig {
        BoundsConfig::default()
    }

    #[test]
    fn names_round_trip() {
        for c in Check::catalog() {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert!("NOPE".parse::<Check>().is_err());
    }

    #[test]
    fn worked_examples() {
        let r = verify(Check::Bgrs, &gauss(0.5), &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.rhs.unwrap() - (1.0 - 0.5f64.sqrt()).powi(4) / 4.0).abs() < 1e-9);
        let r = verify(Check::SteinW2, &gauss(4.0), &cfg()).unwrap();
        assert!((r.rhs.unwrap() - 1.0 / 36.0).abs() < 1e-8);
        let r = verify(Check::DimLsi, &gauss(4.0), &cfg()).unwrap();
        assert!(r.slack.unwrap().abs() < 1e-8);
        let r = verify(Check::Thm1Bis, &gauss(0.5), &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.rhs.unwrap() >= 0.25 * 0.390_36f64.powi(4) - 1e-6);
        let r = verify(Check::CovEps(2), &gauss(4.0), &cfg()).unwrap();
        assert!((r.lhs.unwrap() - (2.0 * 0.318_147_180_559_945_3 + 9.0)).abs() < 1e-9);
        let r = verify(Check::CovFromDeficit, &gauss(4.0), &cfg()).unwrap();
        assert_eq!(r.note.as_deref(), Some("t0 = 1.25"));
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn extremal_suite() {
        let reports = verify_all(&make_extremal(&[1.0]), &cfg()).unwrap();
        let lsi = reports.iter().find(|r| r.check == "LSI").unwrap();
        assert!(lsi.slack.unwrap().abs() < 1e-10);
        let bgrs = reports.iter().find(|r| r.check == "BGRS").unwrap();
        assert_eq!(bgrs.verdict, Verdict::PreconditionNotMet);
        assert!(reports.iter().all(|r| r.verdict != Verdict::Fail));
    }

    #[test]
    fn theta_basics() {
        assert_eq!(theta(0.0), 0.0);
        assert!(theta(0.5) > 0.0 && theta(-0.5) > 0.0);
    }
}
