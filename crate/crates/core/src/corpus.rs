//! The twelve-density test corpus: Gaussians, extremals and mixtures in one
//! and two dimensions. The same densities ship as JSON specs under
//! `crates/core/corpus/`.

use crate::density::{DensitySpec, GaussianMixture, RelativeDensity};

#[derive(Debug, Clone)]
pub struct CorpusDensity {
    pub name: &'static str,
    pub density: RelativeDensity,
}

type Parts = Vec<(f64, Vec<f64>, Vec<Vec<f64>>)>;

fn one_d(parts: &[(f64, f64, f64)]) -> (usize, Parts) {
    (1, parts.iter().map(|&(w, m, v)| (w, vec![m], vec![vec![v]])).collect())
}

fn entries() -> Vec<(&'static str, (usize, Parts))> {
    vec![
        ("gamma_1d", one_d(&[(1.0, 0.0, 1.0)])),
        ("gauss_var4", one_d(&[(1.0, 0.0, 4.0)])),
        ("gauss_var_half", one_d(&[(1.0, 0.0, 0.5)])),
        ("extremal_1", one_d(&[(1.0, 1.0, 1.0)])),
        ("bimodal", one_d(&[(0.5, -1.0, 1.0), (0.5, 1.0, 1.0)])),
        ("asym3", one_d(&[(0.5, -1.0, 0.6), (0.3, 0.5, 1.2), (0.2, 2.0, 0.8)])),
        ("narrow_bimodal", one_d(&[(0.5, -0.5, 0.3), (0.5, 0.5, 0.3)])),
        ("gauss_shifted", one_d(&[(1.0, 0.7, 0.8)])),
        ("gauss2d", (2, vec![(1.0, vec![0.0, 0.0], vec![vec![1.5, 0.4], vec![0.4, 0.7]])])),
        (
            "mix2d",
            (
                2,
                vec![
                    (0.5, vec![-1.0, 0.0], vec![vec![0.8, 0.0], vec![0.0, 0.8]]),
                    (0.5, vec![1.0, 0.5], vec![vec![1.0, 0.3], vec![0.3, 0.6]]),
                ],
            ),
        ),
        ("extremal_2d", (2, vec![(1.0, vec![2.0, -1.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]])])),
        (
            "mix2d_3",
            (
                2,
                vec![
                    (0.4, vec![-0.8, 0.6], vec![vec![0.9, 0.2], vec![0.2, 0.5]]),
                    (0.35, vec![0.9, 0.2], vec![vec![0.6, -0.1], vec![-0.1, 1.3]]),
                    (0.25, vec![0.1, -1.1], vec![vec![1.4, 0.0], vec![0.0, 0.7]]),
                ],
            ),
        ),
    ]
}

/// All twelve corpus densities, in a fixed order.
pub fn standard_corpus() -> Vec<CorpusDensity> {
    entries()
        .into_iter()
        .map(|(name, (dim, parts))| CorpusDensity {
            name,
            density: GaussianMixture::new(dim, parts).expect("corpus densities are valid").into(),
        })
        .collect()
}

pub fn by_name(name: &str) -> Option<CorpusDensity> {
    standard_corpus().into_iter().find(|c| c.name == name)
}

/// JSON spec of a corpus density.
pub fn spec(entry: &CorpusDensity) -> DensitySpec {
    DensitySpec::from_mixture(
        entry.density.as_mixture().expect("corpus densities are mixtures"),
        Some(entry.name.to_string()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_valid_densities() {
        let c = standard_corpus();
        assert_eq!(c.len(), 12);
        assert!(by_name("asym3").is_some());
    }

    #[test]
    fn shipped_specs_match() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
        for entry in standard_corpus() {
            let path = dir.join(format!("{}.json", entry.name));
            let shipped = DensitySpec::from_path(&path).unwrap();
            assert_eq!(shipped.build().unwrap(), entry.density, "{}", entry.name);
        }
    }
}
