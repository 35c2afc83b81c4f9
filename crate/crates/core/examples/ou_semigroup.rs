//! Ornstein-Uhlenbeck evolution of a bimodal mixture: the evolved mixture,
//! posterior mean `E(X | X_t = x)`, and the MMSE form of the Fisher
//! information at a few times.

use lsi_lab::density::{GaussianMixture, RelativeDensity};
use lsi_lab::functionals;
use lsi_lab::numerics::QuadratureConfig;
use lsi_lab::ou;

fn main() -> lsi_lab::Result<()> {
    let cfg = QuadratureConfig::default();
    let mix = GaussianMixture::new(1, vec![(0.5, vec![-1.5], vec![vec![0.4]]), (0.5, vec![1.5], vec![vec![0.4]])])?;
    let d = RelativeDensity::from(mix.clone());

    for t in [0.25, 1.0, 3.0] {
        let evolved = ou::evolve_mixture(&mix, t);
        let c = &evolved.components()[1];
        println!("t = {t}: right component N({:.6}, {:.6})", c.mean()[0], c.cov()[(0, 0)]);
        let means: Vec<String> = [-2.0, 0.0, 0.5, 2.0]
            .iter()
            .map(|&x| Ok(format!("{:+.4}", ou::conditional_mean(&d, t, &[x])?[0])))
            .collect::<lsi_lab::Result<_>>()?;
        println!("  E(X | X_t = -2, 0, 0.5, 2) = {}", means.join(", "));
        let direct = functionals::fisher_at(&d, t, &cfg)?;
        // I(P_tf) = e^{-2t} E|E(X | X_t) - e^{-t}X_t|² / (1 - e^{-2t})²
        let gap = ou::mmse_fisher(&d, t, &cfg)?;
        let s = (-2.0 * t).exp();
        println!("  I(P_tf) = {:.10} direct, {:.10} via MMSE", direct.value, s * gap.value / (1.0 - s).powi(2));
    }
    Ok(())
}
