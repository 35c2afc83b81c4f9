//! The deficit vanishes on the extremal family `f_b(x) = e^{b·x - |b|²/2}`
//! and is strictly positive on a Gaussian with the wrong variance.

use lsi_lab::density::{make_extremal, GaussianMixture, RelativeDensity};
use lsi_lab::functionals;
use lsi_lab::numerics::QuadratureConfig;

fn main() -> lsi_lab::Result<()> {
    let cfg = QuadratureConfig::default();
    println!("{:<24} {:>12} {:>12} {:>12}", "density", "H", "I/2", "delta");
    for b in [vec![0.5], vec![-2.0], vec![1.0, -1.5]] {
        let r = functionals::deficit(&make_extremal(&b), &cfg)?;
        println!(
            "{:<24} {:>12.9} {:>12.9} {:>12.3e}",
            format!("extremal b = {b:?}"),
            r.entropy,
            r.fisher / 2.0,
            r.deficit
        );
    }
    for var in [0.25, 0.5, 2.0, 4.0] {
        let d = RelativeDensity::from(GaussianMixture::gaussian_1d(0.0, var)?);
        let r = functionals::deficit(&d, &cfg)?;
        // closed form: (v - 1)²/(2v) - (v - 1 - ln v)/2
        let exact = (var - 1.0f64).powi(2) / (2.0 * var) - (var - 1.0 - var.ln()) / 2.0;
        println!(
            "{:<24} {:>12.9} {:>12.9} {:>12.9}  exact {exact:.9}",
            format!("N(0, {var})"),
            r.entropy,
            r.fisher / 2.0,
            r.deficit
        );
    }
    Ok(())
}
