use std::f64::consts::PI;

use lsi_lab::density::{RelativeDensity, Tabulated1D};
use lsi_lab::functionals;
use lsi_lab::numerics::QuadratureConfig;

#[test]
fn logistic_on_a_wide_grid() {
    // Standard logistic: differential entropy 2, variance π²/3, Lebesgue
    // Fisher information 1/3, E[X p'/p] = -1.
    let logistic = |x: f64| {
        let e = (-x.abs()).exp();
        e / (1.0 + e).powi(2)
    };
    let tab = Tabulated1D::from_fn(-40.0, 40.0, 8001, logistic).unwrap();
    let d = RelativeDensity::from(tab);
    let r = functionals::deficit(&d, &QuadratureConfig::default()).unwrap();
    let var = PI * PI / 3.0;
    let h = -2.0 + var / 2.0 + 0.5 * (2.0 * PI).ln();
    let i = 1.0 / 3.0 - 2.0 + var;
    assert!((r.entropy - h).abs() < 1e-6, "{} vs {h}", r.entropy);
    assert!((r.fisher - i).abs() < 1e-6, "{} vs {i}", r.fisher);
    assert!((r.deficit - (i / 2.0 - h)).abs() < 1e-6);
}
