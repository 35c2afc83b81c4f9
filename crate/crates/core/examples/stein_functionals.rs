//! Stein kernel and discrepancy of a recentered 1-D mixture, with the
//! certified lower bounds on `D` and `D̃_ε` from test-function families.

use lsi_lab::density::{recenter, GaussianMixture, RelativeDensity};
use lsi_lab::numerics::QuadratureConfig;
use lsi_lab::stein;

fn main() -> lsi_lab::Result<()> {
    let cfg = QuadratureConfig::default();
    let mix = GaussianMixture::new(1, vec![(0.3, vec![-1.0], vec![vec![0.5]]), (0.7, vec![1.2], vec![vec![1.4]])])?;
    let d = recenter(&RelativeDensity::from(mix));

    let kernel = stein::stein_kernel_1d(&d)?;
    for x in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        println!("tau({x:+}) = {:.8}", kernel.value(x));
    }
    let s = stein::stein_discrepancy(&d, &cfg)?;
    println!("S = {:.10} (± {:.1e}, {:?})", s.value, s.error, s.method);

    let dlb = stein::d_lower_bound_default(&d)?;
    println!("D >= {:.10} over {}", dlb.value, dlb.family);
    for eps in [0.1, 0.5, 1.0] {
        let e = stein::dtilde_lower_bound_default(&d, eps)?;
        println!("D̃_{eps} >= {:.10}", e.value);
    }
    Ok(())
}
