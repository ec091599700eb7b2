//! Classification and regression metrics over a scope of samples.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::EncodedDataset;
use crate::edit::Selection;
use crate::model::{GamModel, Shape, Task};

/// Positive-class threshold on the predicted probability (inclusive).
pub const THRESHOLD: f64 = 0.5;
/// Targets with `|y|` at or below this are left out of MAPE.
pub const MAPE_ZERO: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty scope")]
    EmptyScope,
    #[error("selected scope requires an active selection")]
    NoSelection,
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("slice feature `{0}` is not categorical")]
    NotCategorical(String),
    #[error("unknown slice level `{level}` for feature `{feature}`")]
    UnknownLevel { feature: String, level: String },
    #[error("AUC undefined: only one class present")]
    AucUndefined,
    #[error("probabilities and labels differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("labels must be 0 or 1")]
    BadLabel,
    #[error("{0} metrics require a {0} model")]
    WrongTask(&'static str),
}

type Result<T> = std::result::Result<T, MetricsError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scope", rename_all = "lowercase")]
pub enum ScopeSpec {
    Global,
    Selected,
    Slice { feature: String, level: String },
}

/// Sample indices covered by `scope`, ascending.
pub fn resolve_scope(
    model: &GamModel,
    data: &EncodedDataset,
    scope: &ScopeSpec,
    selection: Option<&Selection>,
) -> Result<Vec<usize>> {
    match scope {
        ScopeSpec::Global => Ok((0..data.len()).collect()),
        ScopeSpec::Selected => selection
            .map(|s| s.affected_samples().to_vec())
            .ok_or(MetricsError::NoSelection),
        ScopeSpec::Slice { feature, level } => {
            let index = model
                .feature_index(feature)
                .map_err(|_| MetricsError::UnknownFeature(feature.clone()))?;
            let Shape::Categorical(shape) = &model.shapes()[index] else {
                return Err(MetricsError::NotCategorical(feature.clone()));
            };
            let slot = shape
                .level_index(level)
                .ok_or_else(|| MetricsError::UnknownLevel {
                    feature: feature.clone(),
                    level: level.clone(),
                })? as u32;
            Ok(data
                .slots(index)
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == slot)
                .map(|(row, _)| row)
                .collect())
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// Mean of TPR and TNR; `None` when either class is absent.
    pub fn balanced_accuracy(&self) -> Option<f64> {
        let pos = self.tp + self.fn_;
        let neg = self.tn + self.fp;
        if pos == 0 || neg == 0 {
            return None;
        }
        Some(0.5 * (self.tp as f64 / pos as f64 + self.tn as f64 / neg as f64))
    }
}

impl std::ops::Add for Confusion {
    type Output = Confusion;
    fn add(self, o: Confusion) -> Confusion {
        Confusion {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub fn confusion(probabilities: &[f64], labels: &[f64], threshold: f64) -> Result<Confusion> {
    if probabilities.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(probabilities.len(), labels.len()));
    }
    if probabilities.is_empty() {
        return Err(MetricsError::EmptyScope);
    }
    let mut c = Confusion::default();
    for (&p, &y) in probabilities.iter().zip(labels) {
        let positive = match y {
            1.0 => true,
            0.0 => false,
            _ => return Err(MetricsError::BadLabel),
        };
        match (p >= threshold, positive) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// ROC AUC via the Mann-Whitney rank sum, ties sharing their average rank.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(scores.len(), labels.len()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));

    let n_pos = labels.iter().filter(|&&y| y == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::AucUndefined);
    }

    // Ranks are 1-based; a tie run over positions i..j gets (i + j + 1) / 2.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j + 1) as f64 / 2.0;
        let positives = order[i..j].iter().filter(|&&k| labels[k] == 1.0).count();
        rank_sum += avg_rank * positives as f64;
        i = j;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Original,
    Last,
    Current,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    #[serde(flatten)]
    pub confusion: Confusion,
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balanced_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub rmse: f64,
    pub mae: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mape: Option<f64>,
    pub mape_excluded_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metrics {
    Classification(ClassificationMetrics),
    Regression(RegressionMetrics),
}

/// Metrics for one model over one scope. Undefined values are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub baseline: Baseline,
    pub sample_count: usize,
    #[serde(flatten)]
    pub metrics: Metrics,
}

impl MetricReport {
    pub fn classification(&self) -> Option<&ClassificationMetrics> {
        match &self.metrics {
            Metrics::Classification(c) => Some(c),
            Metrics::Regression(_) => None,
        }
    }

    pub fn regression(&self) -> Option<&RegressionMetrics> {
        match &self.metrics {
            Metrics::Regression(r) => Some(r),
            Metrics::Classification(_) => None,
        }
    }
}

/// Classification report from raw additive scores.
pub fn classification_report(
    scores: &[f64],
    labels: &[f64],
    baseline: Baseline,
) -> Result<MetricReport> {
    let probs: Vec<f64> = scores
        .iter()
        .map(|&s| crate::model::Link::Logit.apply(s))
        .collect();
    let c = confusion(&probs, labels, THRESHOLD)?;
    Ok(MetricReport {
        baseline,
        sample_count: scores.len(),
        metrics: Metrics::Classification(ClassificationMetrics {
            confusion: c,
            accuracy: c.accuracy(),
            balanced_accuracy: c.balanced_accuracy(),
            auc: auc(scores, labels).ok(),
        }),
    })
}

pub fn regression_report(
    predictions: &[f64],
    targets: &[f64],
    baseline: Baseline,
) -> Result<MetricReport> {
    if predictions.len() != targets.len() {
        return Err(MetricsError::LengthMismatch(predictions.len(), targets.len()));
    }
    if predictions.is_empty() {
        return Err(MetricsError::EmptyScope);
    }
    let n = predictions.len() as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut pct = 0.0;
    let mut excluded = 0;
    for (&p, &y) in predictions.iter().zip(targets) {
        let err = p - y;
        sq += err * err;
        abs += err.abs();
        if y.abs() > MAPE_ZERO {
            pct += (err / y).abs();
        } else {
            excluded += 1;
        }
    }
    let kept = predictions.len() - excluded;
    Ok(MetricReport {
        baseline,
        sample_count: predictions.len(),
        metrics: Metrics::Regression(RegressionMetrics {
            rmse: (sq / n).sqrt(),
            mae: abs / n,
            mape: (kept > 0).then(|| pct / kept as f64),
            mape_excluded_count: excluded,
        }),
    })
}

pub fn classification_metrics(
    model: &GamModel,
    data: &EncodedDataset,
    rows: &[usize],
    baseline: Baseline,
) -> Result<MetricReport> {
    if model.task() != Task::Classification {
        return Err(MetricsError::WrongTask("classification"));
    }
    if rows.is_empty() {
        return Err(MetricsError::EmptyScope);
    }
    let scores = data.scores_for(model, rows.iter().copied());
    let labels: Vec<f64> = rows.iter().map(|&r| data.labels()[r]).collect();
    classification_report(&scores, &labels, baseline)
}

pub fn regression_metrics(
    model: &GamModel,
    data: &EncodedDataset,
    rows: &[usize],
    baseline: Baseline,
) -> Result<MetricReport> {
    if model.task() != Task::Regression {
        return Err(MetricsError::WrongTask("regression"));
    }
    if rows.is_empty() {
        return Err(MetricsError::EmptyScope);
    }
    let preds = data.scores_for(model, rows.iter().copied());
    let targets: Vec<f64> = rows.iter().map(|&r| data.labels()[r]).collect();
    regression_report(&preds, &targets, baseline)
}

/// Dispatches on the model's task.
pub fn evaluate(
    model: &GamModel,
    data: &EncodedDataset,
    rows: &[usize],
    baseline: Baseline,
) -> Result<MetricReport> {
    match model.task() {
        Task::Classification => classification_metrics(model, data, rows, baseline),
        Task::Regression => regression_metrics(model, data, rows, baseline),
    }
}

/// The same scope evaluated against the original, last-committed and
/// current models, in that order.
pub fn baseline_reports(
    original: &GamModel,
    last: &GamModel,
    current: &GamModel,
    data: &EncodedDataset,
    rows: &[usize],
) -> Result<[MetricReport; 3]> {
    Ok([
        evaluate(original, data, rows, Baseline::Original)?,
        evaluate(last, data, rows, Baseline::Last)?,
        evaluate(current, data, rows, Baseline::Current)?,
    ])
}
