//! Linking + reordering: which features do the selected samples skew on?
//!
//! For every other feature, the selected samples' bin/level histogram is
//! compared with the training histogram stored in the model, and features are
//! ranked by the l2 distance between the two normalized vectors.

use serde::{Deserialize, Serialize};

use crate::data::{EncodedDataset, UNKNOWN_SLOT};
use crate::edit::Selection;
use crate::model::{GamModel, ModelError};

/// A normalized histogram over one feature's bins or levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub feature: String,
    pub probabilities: Vec<f64>,
    /// No mass to normalize; `probabilities` is all zeros.
    pub empty: bool,
}

impl FrequencyVector {
    fn from_counts(feature: &str, counts: &[f64]) -> Self {
        let total: f64 = counts.iter().sum();
        if total > 0.0 {
            FrequencyVector {
                feature: feature.to_string(),
                probabilities: counts.iter().map(|c| c / total).collect(),
                empty: false,
            }
        } else {
            FrequencyVector {
                feature: feature.to_string(),
                probabilities: vec![0.0; counts.len()],
                empty: true,
            }
        }
    }

    /// Euclidean distance; `None` if either side is empty.
    pub fn distance(&self, other: &FrequencyVector) -> Option<f64> {
        if self.empty || other.empty || self.probabilities.len() != other.probabilities.len() {
            return None;
        }
        Some(
            self.probabilities
                .iter()
                .zip(&other.probabilities)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        )
    }
}

/// Training distribution from the model's per-bin counts.
pub fn training_frequency(model: &GamModel, feature: &str) -> Result<FrequencyVector, ModelError> {
    let shape = model.shape(feature)?;
    let counts: Vec<f64> = shape.counts().iter().map(|&c| c as f64).collect();
    let v = FrequencyVector::from_counts(feature, &counts);
    if v.empty {
        return Err(ModelError::NoTrainingMass(feature.to_string()));
    }
    Ok(v)
}

/// Distribution of `rows` over the feature's bins. Samples with an unknown
/// level are not counted.
pub fn selected_frequency(
    model: &GamModel,
    data: &EncodedDataset,
    feature: &str,
    rows: &[usize],
) -> Result<FrequencyVector, ModelError> {
    let index = model.feature_index(feature)?;
    let slots = data.slots(index);
    let mut counts = vec![0.0; model.shapes()[index].len()];
    for &r in rows {
        let s = slots[r];
        if s != UNKNOWN_SLOT {
            counts[s as usize] += 1.0;
        }
    }
    Ok(FrequencyVector::from_counts(feature, &counts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature: String,
    /// Absent when either histogram has no mass.
    pub distance: Option<f64>,
    pub selected: Vec<f64>,
    pub training: Vec<f64>,
}

/// Features other than the selection's own, most skewed first. Ties keep
/// model order; features without a distance go last.
pub fn rank_correlated_features(
    model: &GamModel,
    data: &EncodedDataset,
    selection: &Selection,
) -> Vec<RankedFeature> {
    let rows = selection.affected_samples();
    if rows.is_empty() {
        return Vec::new();
    }
    let mut ranked: Vec<RankedFeature> = model
        .shapes()
        .iter()
        .filter(|s| s.name() != selection.feature())
        .map(|shape| {
            let name = shape.name();
            let selected = selected_frequency(model, data, name, rows)
                .expect("feature taken from the model");
            let counts: Vec<f64> = shape.counts().iter().map(|&c| c as f64).collect();
            let training = FrequencyVector::from_counts(name, &counts);
            RankedFeature {
                feature: name.to_string(),
                distance: selected.distance(&training),
                selected: selected.probabilities,
                training: training.probabilities,
            }
        })
        .collect();
    // stable sort keeps model order among ties
    ranked.sort_by(|a, b| match (a.distance, b.distance) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    ranked
}
