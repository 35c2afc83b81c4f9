use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{GaussianMixture, RelativeDensity, Tabulated1D};
use crate::{Error, Result};

/// One mixture component in a [`DensitySpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// JSON description of a density:
///
/// ```json
/// {"dim": 1, "family": "mixture", "components": [{"weight": 1, "mean": [0], "cov": [[4]]}]}
/// {"family": "tabulated1d", "grid": [...], "values": [...]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum DensitySpec {
    #[serde(rename = "mixture")]
    Mixture {
        dim: usize,
        components: Vec<ComponentSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    #[serde(rename = "tabulated1d")]
    Tabulated1d {
        grid: Vec<f64>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

impl DensitySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Self::Mixture { name, .. } | Self::Tabulated1d { name, .. } => name.as_deref(),
        }
    }

    pub fn from_mixture(mix: &GaussianMixture, name: Option<String>) -> Self {
        let n = mix.dim();
        Self::Mixture {
            dim: n,
            components: mix
                .components()
                .iter()
                .map(|c| ComponentSpec {
                    weight: c.weight(),
                    mean: c.mean().iter().copied().collect(),
                    cov: (0..n).map(|i| (0..n).map(|j| c.cov()[(i, j)]).collect()).collect(),
                })
                .collect(),
            name,
        }
    }

    /// Validates the spec and builds the density.
    pub fn build(&self) -> Result<RelativeDensity> {
        match self {
            Self::Mixture { dim, components, .. } => {
                let parts = components.iter().map(|c| (c.weight, c.mean.clone(), c.cov.clone())).collect();
                Ok(GaussianMixture::new(*dim, parts)?.into())
            }
            Self::Tabulated1d { grid, values, .. } => Ok(Tabulated1D::new(grid.clone(), values.clone())?.into()),
        }
    }

    /// SHA-256 of the canonical (compact, fixed field order) serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("spec serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

impl TryFrom<&DensitySpec> for RelativeDensity {
    type Error = Error;

    fn try_from(spec: &DensitySpec) -> Result<Self> {
        spec.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixture_spec() {
        let s = r#"{"dim": 1, "family": "mixture", "components": [{"weight": 1.0, "mean": [0.0], "cov": [[4.0]]}]}"#;
        let spec = DensitySpec::from_json(s).unwrap();
        let d = spec.build().unwrap();
        assert_eq!(d.dim(), 1);
        assert_eq!(spec.hash().len(), 64);
        let again = DensitySpec::from_json(&spec.to_json_pretty()).unwrap();
        assert_eq!(again.hash(), spec.hash());
    }

    #[test]
    fn weights_not_summing_to_one_are_rejected() {
        let s = r#"{"dim": 1, "family": "mixture", "components": [
            {"weight": 0.5, "mean": [0.0], "cov": [[1.0]]},
            {"weight": 0.4, "mean": [1.0], "cov": [[1.0]]}]}"#;
        let spec = DensitySpec::from_json(s).unwrap();
        assert!(matches!(spec.build(), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn unknown_family_is_a_parse_error() {
        assert!(DensitySpec::from_json(r#"{"family": "cauchy"}"#).is_err());
    }
}
