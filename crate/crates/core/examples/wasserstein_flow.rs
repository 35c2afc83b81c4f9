//! `W2(μ, γ)` by quantile coupling, Talagrand's inequality, and the
//! transport-entropy-information chain along the flow.

use lsi_lab::density::{GaussianMixture, RelativeDensity};
use lsi_lab::numerics::QuadratureConfig;
use lsi_lab::transport;

fn main() -> lsi_lab::Result<()> {
    let cfg = QuadratureConfig::default();
    let mix = GaussianMixture::new(1, vec![(0.5, vec![-1.5], vec![vec![0.4]]), (0.5, vec![1.5], vec![vec![0.4]])])?;
    let d = RelativeDensity::from(mix);

    let w = transport::w2_to_gamma(&d, &cfg)?;
    println!("W2(mu, gamma) = {:.10} ({:?})", w.value, w.method);
    let tal = transport::talagrand_check(&d, &cfg)?;
    println!("Talagrand W2² <= 2H: {} ({tal:?})", tal.holds());

    let ts: Vec<f64> = (0..=8).map(|k| 0.25 * k as f64).collect();
    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>6}", "t", "w(t)", "W2(mu_t,g)²", "2H", "I", "chain");
    for p in transport::flow_chain(&d, &ts, 1e-3, &cfg)? {
        println!(
            "{:>6.2} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>6}",
            p.t,
            p.w,
            p.w2_to_gamma_sq,
            p.two_entropy,
            p.fisher,
            p.chain_holds() && p.slope_holds(1e-6)
        );
    }
    Ok(())
}
