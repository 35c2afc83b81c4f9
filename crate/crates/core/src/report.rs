//! Run reports and the JSON / CSV writers behind the `lsi-lab` binary.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundsConfig, SlackReport};
use crate::density::RelativeDensity;
use crate::functionals::{self, FunctionalReport};
use crate::numerics::Estimate;
use crate::ou;
use crate::stein::{self, Discrepancy, SteinFunctionalEstimate};
use crate::transport::{self, W2Result};
use crate::{Error, Result};

/// Everything `analyze` computes for one density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub spec_hash: String,
    pub config: BoundsConfig,
    pub functionals: FunctionalReport,
    pub deficit_via_mmse: Option<Estimate>,
    pub stein_discrepancy: Option<Discrepancy>,
    pub w2: Option<W2Result>,
    pub d_est: Option<SteinFunctionalEstimate>,
    pub dtilde_est: Option<SteinFunctionalEstimate>,
    pub checks: Vec<SlackReport>,
    /// Why a quantity above is absent.
    pub notes: Vec<String>,
}

fn optional<T>(what: &str, r: Result<T>, notes: &mut Vec<String>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::UnsupportedFamily(_) | Error::Precondition(_) | Error::UnsupportedKind(_))) => {
            notes.push(format!("{what}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Functionals, Stein estimates, W2 and the inequality catalog. Stein
/// quantities are taken on the recentered density.
pub fn analyze(d: &RelativeDensity, spec_hash: &str, cfg: &BoundsConfig) -> Result<RunReport> {
    let q = &cfg.quadrature;
    let mut notes = Vec::new();
    let functionals = functionals::deficit(d, q)?;
    let centered = crate::density::recenter(d);
    let deficit_via_mmse = optional("deficit via MMSE", functionals::deficit_via_mmse(d, &cfg.time, q), &mut notes)?;
    let stein_discrepancy = optional("Stein discrepancy", stein::stein_discrepancy(&centered, q), &mut notes)?;
    let w2 = optional("W2", transport::w2_to_gamma(d, q), &mut notes)?;
    let d_est = optional("D", stein::d_lower_bound_default(&centered), &mut notes)?;
    let dtilde_est = optional("D~", stein::dtilde_lower_bound_default(&centered, 1.0), &mut notes)?;
    let checks = bounds::verify_all(d, cfg)?;
    Ok(RunReport {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        spec_hash: spec_hash.into(),
        config: cfg.clone(),
        functionals,
        deficit_via_mmse,
        stein_discrepancy,
        w2,
        d_est,
        dtilde_est,
        checks,
        notes,
    })
}

/// Writes every float with 17 significant digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        // Non-finite values never reach here: serde_json maps them to null.
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` as JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// One row of `flow` output; `None` where a precondition fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowRow {
    pub t: f64,
    pub fisher: f64,
    pub scaled_fisher: Option<f64>,
    pub rho: Option<f64>,
    pub w: Option<f64>,
    pub deficit_integrand: Option<f64>,
}

pub const FLOW_HEADER: [&str; 6] = ["t", "I(P_tf)", "e^{2t}I(P_tf)", "rho(t)", "w(t)", "deficit_integrand"];

/// Default `flow` grid: `0, 0.1, ..., 10`.
pub fn default_flow_times() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 10.0).collect()
}

/// Fisher information, its `e^{2t}` rescaling, `ρ(t)`, `w(t) = W2(μ, μ_t)`
/// and the deficit integrand along the OU flow.
pub fn flow_rows(d: &RelativeDensity, ts: &[f64], cfg: &BoundsConfig) -> Result<Vec<FlowRow>> {
    let q = &cfg.quadrature;
    if let Some(t) = ts.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidConfig(format!("flow time {t} must be finite and nonnegative")));
    }
    if d.dim() > 2 {
        return Err(Error::UnsupportedFamily("flow diagnostics in dimension n >= 3"));
    }
    let mix = d.mixture("flow diagnostics")?;
    let centered = d.is_centered(crate::density::CENTERING_TOL);
    let w = if mix.dim() == 1 { Some(transport::w2_flow(d, ts, q)?) } else { None };
    use rayon::prelude::*;
    ts.par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let fisher = functionals::fisher_at(d, t, q)?.value;
            let (scaled_fisher, rho) = if centered {
                let rho = if t == 0.0 {
                    crate::linalg::power_iteration(d.covariance(), 1e-10)
                } else {
                    functionals::rho(d, t, q)?.value
                };
                (Some((2.0 * t).exp() * fisher), Some(rho))
            } else {
                (None, None)
            };
            let integrand = if t == 0.0 { ou::hessian_energy(d, t, q)? } else { ou::mmse_integrand(d, t, q)? };
            Ok(FlowRow {
                t,
                fisher,
                scaled_fisher,
                rho,
                w: w.as_ref().map(|w| w[k].1.value),
                deficit_integrand: Some(integrand.value),
            })
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.11e}")).unwrap_or_default()
}

/// RFC 4180 CSV with 12 significant digits.
pub fn write_flow_csv<W: Write>(rows: &[FlowRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FLOW_HEADER)?;
    for r in rows {
        w.write_record([
            cell(Some(r.t)),
            cell(Some(r.fisher)),
            cell(r.scaled_fisher),
            cell(r.rho),
            cell(r.w),
            cell(r.deficit_integrand),
        ])?;
    }
    w.flush()?;
    Ok(())
}
