//! CSV ingestion. Columns are typed by the model's feature kinds; extra
//! columns are ignored.

use thiserror::Error;

use crate::data::{Column, Dataset, DatasetError};
use crate::model::{FeatureKind, GamModel, Task};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}, column `{column}`: cannot parse {value:?} as a number")]
    BadNumber {
        line: u64,
        column: String,
        value: String,
    },
    #[error("line {line}, column `{column}`: missing value")]
    EmptyCell { line: u64, column: String },
    #[error("line {line}: label {value:?} is not 0 or 1")]
    BadLabel { line: u64, value: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

enum Builder {
    Continuous(Vec<f64>),
    Categorical(Vec<String>),
}

pub fn load_dataset(bytes: &[u8], model: &GamModel, label_column: &str) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader.headers()?.clone();
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let label_at = position(label_column)?;
    let mut columns = Vec::with_capacity(model.feature_count());
    for shape in model.shapes() {
        let at = position(shape.name())?;
        let builder = match shape.kind() {
            FeatureKind::Continuous => Builder::Continuous(Vec::new()),
            FeatureKind::Categorical => Builder::Categorical(Vec::new()),
        };
        columns.push((shape.name().to_string(), at, builder));
    }
    // interaction features are always model features, so no extra columns

    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        for (name, at, builder) in &mut columns {
            let cell = record.get(*at).unwrap_or("").trim();
            if cell.is_empty() {
                return Err(DataError::EmptyCell {
                    line,
                    column: name.clone(),
                });
            }
            match builder {
                Builder::Continuous(v) => match cell.parse::<f64>() {
                    Ok(x) if x.is_finite() => v.push(x),
                    _ => {
                        return Err(DataError::BadNumber {
                            line,
                            column: name.clone(),
                            value: cell.to_string(),
                        })
                    }
                },
                // exact match against model levels, no normalization
                Builder::Categorical(v) => v.push(record.get(*at).unwrap_or("").to_string()),
            }
        }
        let raw = record.get(label_at).unwrap_or("").trim();
        let label = match (model.task(), raw.parse::<f64>()) {
            (Task::Classification, Ok(y)) if y == 0.0 || y == 1.0 => y,
            (Task::Classification, _) => {
                return Err(DataError::BadLabel {
                    line,
                    value: raw.to_string(),
                })
            }
            (Task::Regression, Ok(y)) if y.is_finite() => y,
            (Task::Regression, _) => {
                return Err(DataError::BadNumber {
                    line,
                    column: label_column.to_string(),
                    value: raw.to_string(),
                })
            }
        };
        labels.push(label);
    }
    let columns = columns
        .into_iter()
        .map(|(name, _, b)| {
            let col = match b {
                Builder::Continuous(v) => Column::Continuous(v),
                Builder::Categorical(v) => Column::Categorical(v),
            };
            (name, col)
        })
        .collect();
    Ok(Dataset::new(model.task(), columns, labels)?)
}
