//! A 1-D density given on a grid: entropy, Fisher information, Stein
//! discrepancy and `W2` from the tabulated values alone.

use lsi_lab::density::{recenter, RelativeDensity, Tabulated1D};
use lsi_lab::numerics::QuadratureConfig;
use lsi_lab::{functionals, stein, transport};

fn main() -> lsi_lab::Result<()> {
    let cfg = QuadratureConfig::default();
    // Logistic law, variance π²/3 before recentering.
    let logistic = |x: f64| {
        let e = (-x.abs()).exp();
        e / (1.0 + e).powi(2)
    };
    let tab = Tabulated1D::from_fn(-40.0, 40.0, 8001, logistic)?;
    let d = recenter(&RelativeDensity::from(tab));
    let r = functionals::deficit(&d, &cfg)?;
    println!("H = {:.8}  I = {:.8}  delta = {:.8}", r.entropy, r.fisher, r.deficit);
    let s = stein::stein_discrepancy(&d, &cfg)?;
    println!("S = {:.8}", s.value);
    let w = transport::w2_to_gamma(&d, &cfg)?;
    println!("W2 = {:.8} ({:?})", w.value, w.method);
    Ok(())
}
