use super::net::DenseNet;
use crate::error::{Error, Result};
use crate::survival::Cohort;

/// Which hidden layers to read activations from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LayerSelector {
    /// Every hidden layer, input side first.
    #[default]
    All,
    Layers(Vec<usize>),
}

impl LayerSelector {
    fn resolve(&self, net: &DenseNet) -> Result<Vec<usize>> {
        let available = net.n_hidden();
        match self {
            LayerSelector::All => {
                if available == 0 {
                    return Err(Error::InvalidLayer { index: 0, available });
                }
                Ok((0..available).collect())
            }
            LayerSelector::Layers(ls) => {
                if ls.is_empty() {
                    return Err(Error::invalid("layer selector is empty"));
                }
                match ls.iter().find(|&&l| l >= available) {
                    Some(&index) => Err(Error::InvalidLayer { index, available }),
                    None => Ok(ls.clone()),
                }
            }
        }
    }
}

/// Hidden activations per subject: one row per subject, columns laid out
/// layer by layer in selector order.
pub fn extract_features(net: &DenseNet, cohort: &Cohort, selector: &LayerSelector) -> Result<Vec<Vec<f64>>> {
    let layers = selector.resolve(net)?;
    cohort
        .subjects()
        .iter()
        .map(|s| {
            let pass = net.forward(&s.features)?;
            Ok(layers.iter().flat_map(|&l| pass.activations[l].iter().copied()).collect())
        })
        .collect()
}

/// Column names matching [`extract_features`]: `{prefix}h{layer}_{unit}`.
pub fn learned_feature_names(net: &DenseNet, selector: &LayerSelector, prefix: &str) -> Result<Vec<String>> {
    let widths = net.hidden_widths();
    Ok(selector
        .resolve(net)?
        .into_iter()
        .flat_map(|l| (0..widths[l]).map(move |u| format!("{prefix}h{l}_{u}")))
        .collect())
}

/// Provided (precomputed) features side by side with learned activations.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    pub provided: Vec<Vec<f64>>,
    pub learned: Vec<Vec<f64>>,
    /// `[provided | learned]` per row.
    pub concatenated: Vec<Vec<f64>>,
}

impl FeatureBundle {
    pub fn new(provided: Vec<Vec<f64>>, learned: Vec<Vec<f64>>) -> Result<Self> {
        if provided.len() != learned.len() {
            return Err(Error::DimensionMismatch {
                expected: provided.len(),
                found: learned.len(),
            });
        }
        let concatenated = provided
            .iter()
            .zip(&learned)
            .map(|(p, l)| p.iter().chain(l).copied().collect())
            .collect();
        Ok(Self {
            provided,
            learned,
            concatenated,
        })
    }

    pub fn width(&self) -> usize {
        self.concatenated.first().map_or(0, Vec::len)
    }
}
