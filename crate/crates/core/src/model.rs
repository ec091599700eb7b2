//! GAM data model: shape functions, inference, importance and re-centering.
//!
//! A model predicts `g(y) = intercept + f_1(x_1) + ... + f_M(x_M)` (plus any
//! pairwise interaction terms). Every shape function is piecewise constant:
//! continuous features are split into half-open bins, categorical features map
//! each level to one score.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("sample is missing feature `{0}`")]
    MissingFeature(String),
    #[error("non-finite feature value for `{0}`")]
    NonFiniteValue(String),
    #[error("feature `{feature}` expects a {expected} value")]
    WrongValueKind {
        feature: String,
        expected: &'static str,
    },
    #[error("feature `{0}` has no training mass (all counts are zero)")]
    NoTrainingMass(String),
}

impl ModelError {
    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    Logit,
}

impl Link {
    /// Maps an additive score into prediction space.
    pub fn apply(self, score: f64) -> f64 {
        match self {
            Link::Identity => score,
            Link::Logit => 1.0 / (1.0 + (-score).exp()),
        }
    }

    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Classification => Link::Logit,
            Task::Regression => Link::Identity,
        }
    }
}

/// Index of the bin holding `value`: the largest `i` with `edges[i] <= value`.
/// Values below the first edge clamp to bin 0.
pub fn bin_index(edges: &[f64], value: f64) -> Result<usize, NonFinite> {
    if !value.is_finite() {
        return Err(NonFinite);
    }
    // partition_point finds the first edge > value.
    Ok(edges.partition_point(|&e| e <= value).saturating_sub(1))
}

/// Marker error for NaN or infinite feature values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("non-finite feature value")]
pub struct NonFinite;

/// A continuous shape function over half-open bins `[edge_i, edge_{i+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousShape {
    pub(crate) name: String,
    pub(crate) bin_edges: Vec<f64>,
    pub(crate) scores: Vec<f64>,
    pub(crate) counts: Vec<u64>,
    pub(crate) stderr: Option<Vec<Option<f64>>>,
}

impl ContinuousShape {
    pub fn new(
        name: impl Into<String>,
        bin_edges: Vec<f64>,
        scores: Vec<f64>,
        counts: Vec<u64>,
        stderr: Option<Vec<Option<f64>>>,
    ) -> Result<Self> {
        let shape = ContinuousShape {
            name: name.into(),
            bin_edges,
            scores,
            counts,
            stderr,
        };
        shape.validate("")?;
        Ok(shape)
    }

    fn validate(&self, prefix: &str) -> Result<()> {
        let b = self.bin_edges.len();
        if b == 0 {
            return Err(ModelError::invalid(
                format!("{prefix}bin_edges"),
                "at least one bin is required",
            ));
        }
        for (i, e) in self.bin_edges.iter().enumerate() {
            if !e.is_finite() {
                return Err(ModelError::invalid(
                    format!("{prefix}bin_edges[{i}]"),
                    "edge must be finite",
                ));
            }
        }
        if let Some(i) = self.bin_edges.windows(2).position(|w| w[0] >= w[1]) {
            return Err(ModelError::invalid(
                format!("{prefix}bin_edges"),
                format!("edges must be strictly ascending (index {} is not)", i + 1),
            ));
        }
        check_parallel(prefix, "bin_edges", b, &self.scores, &self.counts, &self.stderr)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
    pub fn stderr(&self) -> Option<&[Option<f64>]> {
        self.stderr.as_deref()
    }

    pub fn bin_index(&self, value: f64) -> Result<usize> {
        bin_index(&self.bin_edges, value).map_err(|_| ModelError::NonFiniteValue(self.name.clone()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalShape {
    pub(crate) name: String,
    pub(crate) levels: Vec<String>,
    pub(crate) scores: Vec<f64>,
    pub(crate) counts: Vec<u64>,
    pub(crate) stderr: Option<Vec<Option<f64>>>,
}

impl CategoricalShape {
    pub fn new(
        name: impl Into<String>,
        levels: Vec<String>,
        scores: Vec<f64>,
        counts: Vec<u64>,
        stderr: Option<Vec<Option<f64>>>,
    ) -> Result<Self> {
        let shape = CategoricalShape {
            name: name.into(),
            levels,
            scores,
            counts,
            stderr,
        };
        shape.validate("")?;
        Ok(shape)
    }

    fn validate(&self, prefix: &str) -> Result<()> {
        if self.levels.is_empty() {
            return Err(ModelError::invalid(
                format!("{prefix}levels"),
                "at least one level is required",
            ));
        }
        let mut seen = HashMap::new();
        for (i, level) in self.levels.iter().enumerate() {
            if let Some(first) = seen.insert(level.as_str(), i) {
                return Err(ModelError::invalid(
                    format!("{prefix}levels[{i}]"),
                    format!("duplicate level `{level}` (first at index {first})"),
                ));
            }
        }
        check_parallel(
            prefix,
            "levels",
            self.levels.len(),
            &self.scores,
            &self.counts,
            &self.stderr,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn levels(&self) -> &[String] {
        &self.levels
    }
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
    pub fn stderr(&self) -> Option<&[Option<f64>]> {
        self.stderr.as_deref()
    }

    pub fn level_index(&self, level: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == level)
    }
}

fn check_parallel(
    prefix: &str,
    axis: &str,
    len: usize,
    scores: &[f64],
    counts: &[u64],
    stderr: &Option<Vec<Option<f64>>>,
) -> Result<()> {
    if scores.len() != len {
        return Err(ModelError::invalid(
            format!("{prefix}scores"),
            format!("length {} does not match {axis} length {len}", scores.len()),
        ));
    }
    if counts.len() != len {
        return Err(ModelError::invalid(
            format!("{prefix}counts"),
            format!(
                "length {} does not match scores length {}",
                counts.len(),
                scores.len()
            ),
        ));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(ModelError::invalid(
            format!("{prefix}scores[{i}]"),
            "score must be finite",
        ));
    }
    if let Some(stderr) = stderr {
        if stderr.len() != len {
            return Err(ModelError::invalid(
                format!("{prefix}stderr"),
                format!("length {} does not match {axis} length {len}", stderr.len()),
            ));
        }
        for (i, s) in stderr.iter().enumerate() {
            if let Some(s) = s {
                if !s.is_finite() || *s < 0.0 {
                    return Err(ModelError::invalid(
                        format!("{prefix}stderr[{i}]"),
                        "stderr must be finite and non-negative",
                    ));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Continuous(ContinuousShape),
    Categorical(CategoricalShape),
}

impl Shape {
    pub fn name(&self) -> &str {
        match self {
            Shape::Continuous(s) => &s.name,
            Shape::Categorical(s) => &s.name,
        }
    }

    pub fn kind(&self) -> FeatureKind {
        match self {
            Shape::Continuous(_) => FeatureKind::Continuous,
            Shape::Categorical(_) => FeatureKind::Categorical,
        }
    }

    pub fn scores(&self) -> &[f64] {
        match self {
            Shape::Continuous(s) => &s.scores,
            Shape::Categorical(s) => &s.scores,
        }
    }

    pub fn counts(&self) -> &[u64] {
        match self {
            Shape::Continuous(s) => &s.counts,
            Shape::Categorical(s) => &s.counts,
        }
    }

    pub fn stderr(&self) -> Option<&[Option<f64>]> {
        match self {
            Shape::Continuous(s) => s.stderr(),
            Shape::Categorical(s) => s.stderr(),
        }
    }

    /// Number of bins (continuous) or levels (categorical).
    pub fn len(&self) -> usize {
        self.scores().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn scores_mut(&mut self) -> &mut Vec<f64> {
        match self {
            Shape::Continuous(s) => &mut s.scores,
            Shape::Categorical(s) => &mut s.scores,
        }
    }

    pub(crate) fn stderr_mut(&mut self) -> &mut Option<Vec<Option<f64>>> {
        match self {
            Shape::Continuous(s) => &mut s.stderr,
            Shape::Categorical(s) => &mut s.stderr,
        }
    }

    fn validate(&self, prefix: &str) -> Result<()> {
        match self {
            Shape::Continuous(s) => s.validate(prefix),
            Shape::Categorical(s) => s.validate(prefix),
        }
    }

    /// Resolves a value to a bin/level slot. `Ok(None)` means an unknown level.
    pub fn slot(&self, value: &FeatureValue) -> Result<Option<usize>> {
        match (self, value) {
            (Shape::Continuous(s), FeatureValue::Number(v)) => s.bin_index(*v).map(Some),
            (Shape::Categorical(s), FeatureValue::Level(l)) => Ok(s.level_index(l)),
            (Shape::Continuous(s), FeatureValue::Level(_)) => Err(ModelError::WrongValueKind {
                feature: s.name.clone(),
                expected: "numeric",
            }),
            (Shape::Categorical(s), FeatureValue::Number(_)) => Err(ModelError::WrongValueKind {
                feature: s.name.clone(),
                expected: "categorical",
            }),
        }
    }

    /// Count-weighted mean score; `None` when the shape has no training mass.
    pub fn weighted_mean(&self) -> Option<f64> {
        let total: u64 = self.counts().iter().sum();
        if total == 0 {
            return None;
        }
        let sum = compensated_sum(
            self.scores()
                .iter()
                .zip(self.counts())
                .map(|(s, &c)| s * c as f64),
        );
        Some(sum / total as f64)
    }
}

/// Neumaier summation; keeps re-centering residuals at the rounding floor.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// One axis of an interaction heatmap.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Continuous { bin_edges: Vec<f64> },
    Categorical { levels: Vec<String> },
}

impl Axis {
    pub fn len(&self) -> usize {
        match self {
            Axis::Continuous { bin_edges } => bin_edges.len(),
            Axis::Categorical { levels } => levels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn kind(&self) -> FeatureKind {
        match self {
            Axis::Continuous { .. } => FeatureKind::Continuous,
            Axis::Categorical { .. } => FeatureKind::Categorical,
        }
    }

    pub(crate) fn slot(&self, feature: &str, value: &FeatureValue) -> Result<Option<usize>> {
        match (self, value) {
            (Axis::Continuous { bin_edges }, FeatureValue::Number(v)) => bin_index(bin_edges, *v)
                .map(Some)
                .map_err(|_| ModelError::NonFiniteValue(feature.to_string())),
            (Axis::Categorical { levels }, FeatureValue::Level(l)) => {
                Ok(levels.iter().position(|x| x == l))
            }
            (Axis::Continuous { .. }, _) => Err(ModelError::WrongValueKind {
                feature: feature.to_string(),
                expected: "numeric",
            }),
            (Axis::Categorical { .. }, _) => Err(ModelError::WrongValueKind {
                feature: feature.to_string(),
                expected: "categorical",
            }),
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        match self {
            Axis::Continuous { bin_edges } => {
                if bin_edges.is_empty() {
                    return Err(ModelError::invalid(path, "axis needs at least one bin"));
                }
                if bin_edges.iter().any(|e| !e.is_finite())
                    || bin_edges.windows(2).any(|w| w[0] >= w[1])
                {
                    return Err(ModelError::invalid(
                        format!("{path}.bin_edges"),
                        "edges must be finite and strictly ascending",
                    ));
                }
            }
            Axis::Categorical { levels } => {
                if levels.is_empty() {
                    return Err(ModelError::invalid(path, "axis needs at least one level"));
                }
                let mut sorted: Vec<&String> = levels.iter().collect();
                sorted.sort();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(ModelError::invalid(
                        format!("{path}.levels"),
                        "levels must be distinct",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A read-only pairwise term `f_ij(x_i, x_j)`. No edit tool may target it.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTerm {
    pub(crate) feature_i: String,
    pub(crate) feature_j: String,
    pub(crate) axis_i: Axis,
    pub(crate) axis_j: Axis,
    pub(crate) scores: Vec<Vec<f64>>,
}

impl InteractionTerm {
    pub fn new(
        feature_i: impl Into<String>,
        feature_j: impl Into<String>,
        axis_i: Axis,
        axis_j: Axis,
        scores: Vec<Vec<f64>>,
    ) -> Self {
        InteractionTerm {
            feature_i: feature_i.into(),
            feature_j: feature_j.into(),
            axis_i,
            axis_j,
            scores,
        }
    }

    pub fn features(&self) -> (&str, &str) {
        (&self.feature_i, &self.feature_j)
    }
    pub fn axes(&self) -> (&Axis, &Axis) {
        (&self.axis_i, &self.axis_j)
    }
    pub fn scores(&self) -> &[Vec<f64>] {
        &self.scores
    }

    pub fn score_at(&self, i: usize, j: usize) -> f64 {
        self.scores[i][j]
    }

    fn validate(&self, path: &str, shapes: &[Shape]) -> Result<()> {
        if self.feature_i == self.feature_j {
            return Err(ModelError::invalid(
                format!("{path}.feature_j"),
                "interaction needs two distinct features",
            ));
        }
        for (key, name, axis) in [
            ("feature_i", &self.feature_i, &self.axis_i),
            ("feature_j", &self.feature_j, &self.axis_j),
        ] {
            let Some(shape) = shapes.iter().find(|s| s.name() == name) else {
                return Err(ModelError::invalid(
                    format!("{path}.{key}"),
                    format!("unknown feature `{name}`"),
                ));
            };
            if shape.kind() != axis.kind() {
                return Err(ModelError::invalid(
                    format!("{path}.axis_{}", &key[8..]),
                    format!("axis kind does not match feature `{name}`"),
                ));
            }
        }
        self.axis_i.validate(&format!("{path}.axis_i"))?;
        self.axis_j.validate(&format!("{path}.axis_j"))?;
        if self.scores.len() != self.axis_i.len() {
            return Err(ModelError::invalid(
                format!("{path}.score_matrix"),
                format!(
                    "{} rows but axis_i has length {}",
                    self.scores.len(),
                    self.axis_i.len()
                ),
            ));
        }
        for (r, row) in self.scores.iter().enumerate() {
            if row.len() != self.axis_j.len() {
                return Err(ModelError::invalid(
                    format!("{path}.score_matrix[{r}]"),
                    format!(
                        "{} columns but axis_j has length {}",
                        row.len(),
                        self.axis_j.len()
                    ),
                ));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(ModelError::invalid(
                    format!("{path}.score_matrix[{r}][{c}]"),
                    "score must be finite",
                ));
            }
        }
        Ok(())
    }
}

/// A feature value supplied at inference time.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Number(f64),
    Level(String),
}

impl From<f64> for FeatureValue {
    fn from(v: f64) -> Self {
        FeatureValue::Number(v)
    }
}

impl From<&str> for FeatureValue {
    fn from(v: &str) -> Self {
        FeatureValue::Level(v.to_string())
    }
}

/// One input row keyed by feature name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sample(pub HashMap<String, FeatureValue>);

impl Sample {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, feature: &str, value: impl Into<FeatureValue>) -> Self {
        self.0.insert(feature.to_string(), value.into());
        self
    }

    pub fn get(&self, feature: &str) -> Option<&FeatureValue> {
        self.0.get(feature)
    }
}

/// Tally of categorical values that matched no model level, per feature.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct UnknownLevelReport(pub BTreeMap<String, BTreeMap<String, usize>>);

impl UnknownLevelReport {
    pub fn record(&mut self, feature: &str, level: &str) {
        *self
            .0
            .entry(feature.to_string())
            .or_default()
            .entry(level.to_string())
            .or_default() += 1;
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.values().flat_map(|m| m.values()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GamModel {
    pub(crate) task: Task,
    pub(crate) link: Link,
    pub(crate) intercept: f64,
    pub(crate) shapes: Vec<Shape>,
    pub(crate) interactions: Vec<InteractionTerm>,
}

impl GamModel {
    /// Builds and validates a model. Error paths are rooted at the model
    /// document (`features[2].scores`, `interactions[0].axis_i`, ...).
    pub fn new(
        task: Task,
        link: Link,
        intercept: f64,
        shapes: Vec<Shape>,
        interactions: Vec<InteractionTerm>,
    ) -> Result<Self> {
        if link != Link::for_task(task) {
            return Err(ModelError::invalid(
                "link",
                format!(
                    "{} requires the {} link",
                    serde_json::to_value(task).unwrap().as_str().unwrap(),
                    serde_json::to_value(Link::for_task(task))
                        .unwrap()
                        .as_str()
                        .unwrap()
                ),
            ));
        }
        if !intercept.is_finite() {
            return Err(ModelError::invalid("intercept", "intercept must be finite"));
        }
        if shapes.is_empty() {
            return Err(ModelError::invalid("features", "at least one feature is required"));
        }
        let mut names = HashMap::new();
        for (i, shape) in shapes.iter().enumerate() {
            let prefix = format!("features[{i}].");
            if shape.name().is_empty() {
                return Err(ModelError::invalid(
                    format!("{prefix}name"),
                    "feature name must not be empty",
                ));
            }
            if let Some(first) = names.insert(shape.name(), i) {
                return Err(ModelError::invalid(
                    format!("{prefix}name"),
                    format!("duplicate feature name `{}` (first at index {first})", shape.name()),
                ));
            }
            shape.validate(&prefix)?;
        }
        for (k, term) in interactions.iter().enumerate() {
            term.validate(&format!("interactions[{k}]"), &shapes)?;
        }
        Ok(GamModel {
            task,
            link,
            intercept,
            shapes,
            interactions,
        })
    }

    pub fn task(&self) -> Task {
        self.task
    }
    pub fn link(&self) -> Link {
        self.link
    }
    pub fn intercept(&self) -> f64 {
        self.intercept
    }
    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }
    pub fn interactions(&self) -> &[InteractionTerm] {
        &self.interactions
    }
    /// Number of additive features `M`.
    pub fn feature_count(&self) -> usize {
        self.shapes.len()
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.shapes
            .iter()
            .position(|s| s.name() == name)
            .ok_or_else(|| ModelError::UnknownFeature(name.to_string()))
    }

    pub fn shape(&self, name: &str) -> Result<&Shape> {
        self.feature_index(name).map(|i| &self.shapes[i])
    }

    /// `f_j(value)`. Unknown categorical levels contribute 0.
    pub fn contribution(&self, feature: &str, value: &FeatureValue) -> Result<f64> {
        let shape = self.shape(feature)?;
        Ok(shape.slot(value)?.map_or(0.0, |i| shape.scores()[i]))
    }

    pub fn predict_score(&self, sample: &Sample) -> Result<f64> {
        self.predict_score_tallied(sample, &mut UnknownLevelReport::default())
    }

    /// Additive score; unknown categorical levels are recorded in `report`.
    pub fn predict_score_tallied(
        &self,
        sample: &Sample,
        report: &mut UnknownLevelReport,
    ) -> Result<f64> {
        let mut score = self.intercept;
        for shape in &self.shapes {
            let value = sample
                .get(shape.name())
                .ok_or_else(|| ModelError::MissingFeature(shape.name().to_string()))?;
            match shape.slot(value)? {
                Some(i) => score += shape.scores()[i],
                None => {
                    if let FeatureValue::Level(l) = value {
                        report.record(shape.name(), l);
                    }
                }
            }
        }
        for term in &self.interactions {
            let vi = sample
                .get(&term.feature_i)
                .ok_or_else(|| ModelError::MissingFeature(term.feature_i.clone()))?;
            let vj = sample
                .get(&term.feature_j)
                .ok_or_else(|| ModelError::MissingFeature(term.feature_j.clone()))?;
            let si = term.axis_i.slot(&term.feature_i, vi)?;
            let sj = term.axis_j.slot(&term.feature_j, vj)?;
            if let (Some(i), Some(j)) = (si, sj) {
                score += term.scores[i][j];
            }
        }
        Ok(score)
    }

    pub fn predict(&self, sample: &Sample) -> Result<f64> {
        self.predict_score(sample).map(|s| self.link.apply(s))
    }

    /// Count-weighted mean of `|score|` for one feature.
    pub fn feature_importance(&self, feature: &str) -> Result<f64> {
        let shape = self.shape(feature)?;
        let total: u64 = shape.counts().iter().sum();
        if total == 0 {
            return Err(ModelError::NoTrainingMass(feature.to_string()));
        }
        let sum: f64 = shape
            .scores()
            .iter()
            .zip(shape.counts())
            .map(|(s, &c)| s.abs() * c as f64)
            .sum();
        Ok(sum / total as f64)
    }

    /// Feature names with importance, most important first. Ties keep model order.
    pub fn importance_ranking(&self) -> Result<Vec<(String, f64)>> {
        let mut ranked = self
            .shapes
            .iter()
            .map(|s| Ok((s.name().to_string(), self.feature_importance(s.name())?)))
            .collect::<Result<Vec<_>>>()?;
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        Ok(ranked)
    }

    /// Shifts each feature to count-weighted zero mean and moves the shift
    /// into the intercept. Predictions are unchanged.
    ///
    /// A feature whose mean is already at the rounding floor is left
    /// untouched, so re-centering a re-centered model is the identity.
    pub fn recenter(&self) -> Result<GamModel> {
        let mut out = self.clone();
        let mut shift = Vec::with_capacity(self.shapes.len());
        for shape in &self.shapes {
            let mean = shape
                .weighted_mean()
                .ok_or_else(|| ModelError::NoTrainingMass(shape.name().to_string()))?;
            shift.push(mean);
        }
        for (shape, mean) in out.shapes.iter_mut().zip(shift) {
            let scale = shape.scores().iter().fold(1.0f64, |m, s| m.max(s.abs()));
            if mean.abs() <= RECENTER_FLOOR * scale {
                continue;
            }
            for s in shape.scores_mut() {
                *s -= mean;
            }
            out.intercept += mean;
        }
        Ok(out)
    }
}

/// Relative magnitude below which a feature mean counts as already zero.
const RECENTER_FLOOR: f64 = 1e-13;
