//! Evaluation samples and their bin-encoded form.

use std::collections::HashMap;

use crate::model::{
    bin_index, Axis, FeatureValue, GamModel, ModelError, Sample, Shape, Task, UnknownLevelReport,
};

/// Slot code for a categorical value that matched no model level.
pub const UNKNOWN_SLOT: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Continuous(Vec<f64>),
    Categorical(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Continuous(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, row: usize) -> FeatureValue {
        match self {
            Column::Continuous(v) => FeatureValue::Number(v[row]),
            Column::Categorical(v) => FeatureValue::Level(v[row].clone()),
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("column `{column}` has {len} rows but there are {n} labels")]
    RaggedColumn { column: String, len: usize, n: usize },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("label at row {row} is {value}; classification labels must be 0 or 1")]
    BadLabel { row: usize, value: f64 },
    #[error("label at row {row} is not finite")]
    NonFiniteLabel { row: usize },
}

/// A column-typed sample table with aligned labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Column>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(
        task: Task,
        columns: Vec<(String, Column)>,
        labels: Vec<f64>,
    ) -> Result<Self, DatasetError> {
        let n = labels.len();
        let mut names = Vec::with_capacity(columns.len());
        let mut cols = Vec::with_capacity(columns.len());
        for (name, col) in columns {
            if col.len() != n {
                return Err(DatasetError::RaggedColumn {
                    column: name,
                    len: col.len(),
                    n,
                });
            }
            if names.contains(&name) {
                return Err(DatasetError::DuplicateColumn(name));
            }
            names.push(name);
            cols.push(col);
        }
        for (row, &y) in labels.iter().enumerate() {
            if !y.is_finite() {
                return Err(DatasetError::NonFiniteLabel { row });
            }
            if task == Task::Classification && y != 0.0 && y != 1.0 {
                return Err(DatasetError::BadLabel { row, value: y });
            }
        }
        Ok(Dataset {
            names,
            columns: cols,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.columns[i])
    }

    pub fn sample(&self, row: usize) -> Sample {
        Sample(
            self.names
                .iter()
                .zip(&self.columns)
                .map(|(n, c)| (n.clone(), c.value(row)))
                .collect::<HashMap<_, _>>(),
        )
    }
}

/// A dataset resolved against a model's bins and levels.
///
/// Edits never move bin edges or levels, so one encoding serves every
/// version of a model in a session.
#[derive(Debug, Clone)]
pub struct EncodedDataset {
    slots: Vec<Vec<u32>>,
    pair_slots: Vec<(Vec<u32>, Vec<u32>)>,
    labels: Vec<f64>,
    unknown: UnknownLevelReport,
}

impl EncodedDataset {
    pub fn encode(model: &GamModel, data: &Dataset) -> Result<Self, ModelError> {
        let mut unknown = UnknownLevelReport::default();
        let mut slots = Vec::with_capacity(model.feature_count());
        for shape in model.shapes() {
            let column = data
                .column(shape.name())
                .ok_or_else(|| ModelError::MissingFeature(shape.name().to_string()))?;
            slots.push(encode_shape(shape, column, &mut unknown)?);
        }
        let mut pair_slots = Vec::with_capacity(model.interactions().len());
        for term in model.interactions() {
            let (fi, fj) = term.features();
            let (ai, aj) = term.axes();
            let ci = data
                .column(fi)
                .ok_or_else(|| ModelError::MissingFeature(fi.to_string()))?;
            let cj = data
                .column(fj)
                .ok_or_else(|| ModelError::MissingFeature(fj.to_string()))?;
            pair_slots.push((encode_axis(fi, ai, ci)?, encode_axis(fj, aj, cj)?));
        }
        Ok(EncodedDataset {
            slots,
            pair_slots,
            labels: data.labels().to_vec(),
            unknown,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Bin/level slot per sample for the feature at `feature_index`.
    pub fn slots(&self, feature_index: usize) -> &[u32] {
        &self.slots[feature_index]
    }

    pub fn unknown_levels(&self) -> &UnknownLevelReport {
        &self.unknown
    }

    /// Additive scores for every sample. Summation order matches
    /// [`GamModel::predict_score`], so results agree bit for bit.
    pub fn scores(&self, model: &GamModel) -> Vec<f64> {
        self.scores_for(model, 0..self.len())
    }

    pub fn scores_for(
        &self,
        model: &GamModel,
        rows: impl IntoIterator<Item = usize>,
    ) -> Vec<f64> {
        rows.into_iter()
            .map(|row| {
                let mut score = model.intercept();
                for (shape, slots) in model.shapes().iter().zip(&self.slots) {
                    let slot = slots[row];
                    if slot != UNKNOWN_SLOT {
                        score += shape.scores()[slot as usize];
                    }
                }
                for (term, (si, sj)) in model.interactions().iter().zip(&self.pair_slots) {
                    let (i, j) = (si[row], sj[row]);
                    if i != UNKNOWN_SLOT && j != UNKNOWN_SLOT {
                        score += term.score_at(i as usize, j as usize);
                    }
                }
                score
            })
            .collect()
    }

    pub fn predictions(&self, model: &GamModel) -> Vec<f64> {
        let link = model.link();
        self.scores(model).into_iter().map(|s| link.apply(s)).collect()
    }
}

fn encode_shape(
    shape: &Shape,
    column: &Column,
    unknown: &mut UnknownLevelReport,
) -> Result<Vec<u32>, ModelError> {
    match (shape, column) {
        (Shape::Continuous(s), Column::Continuous(values)) => values
            .iter()
            .map(|&v| s.bin_index(v).map(|i| i as u32))
            .collect(),
        (Shape::Categorical(s), Column::Categorical(values)) => {
            let lookup: HashMap<&str, u32> = s
                .levels()
                .iter()
                .enumerate()
                .map(|(i, l)| (l.as_str(), i as u32))
                .collect();
            Ok(values
                .iter()
                .map(|v| match lookup.get(v.as_str()) {
                    Some(&i) => i,
                    None => {
                        unknown.record(s.name(), v);
                        UNKNOWN_SLOT
                    }
                })
                .collect())
        }
        (Shape::Continuous(s), _) => Err(ModelError::WrongValueKind {
            feature: s.name().to_string(),
            expected: "numeric",
        }),
        (Shape::Categorical(s), _) => Err(ModelError::WrongValueKind {
            feature: s.name().to_string(),
            expected: "categorical",
        }),
    }
}

fn encode_axis(feature: &str, axis: &Axis, column: &Column) -> Result<Vec<u32>, ModelError> {
    match (axis, column) {
        (Axis::Continuous { bin_edges }, Column::Continuous(values)) => values
            .iter()
            .map(|&v| {
                bin_index(bin_edges, v)
                    .map(|i| i as u32)
                    .map_err(|_| ModelError::NonFiniteValue(feature.to_string()))
            })
            .collect(),
        (Axis::Categorical { levels }, Column::Categorical(values)) => Ok(values
            .iter()
            .map(|v| {
                levels
                    .iter()
                    .position(|l| l == v)
                    .map_or(UNKNOWN_SLOT, |i| i as u32)
            })
            .collect()),
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
