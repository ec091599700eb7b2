//! File formats: model documents, CSV datasets, edit scripts, save bundles.

pub mod bundle;
pub mod canonical;
pub mod dataset_csv;
pub mod model_doc;
pub mod script;

use std::fmt;

use crate::model::{GamModel, ModelError};

pub use bundle::{load_bundle, save_bundle, LoadedBundle};
pub use canonical::{canonical_json, commit_id, to_canonical};
pub use dataset_csv::{load_dataset, DataError};
pub use model_doc::{model_to_bytes, model_to_value, parse_model};
pub use script::{parse_edit_script, ScriptEntry};

/// A document problem located by a JSON path such as `features[0].bin_edges`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub path: String,
    pub message: String,
}

impl FormatError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn syntax(e: serde_json::Error) -> Self {
        FormatError::new("$", format!("invalid JSON: {e}"))
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for FormatError {}

/// Parses, validates and re-centers a model document.
pub fn load_model(bytes: &[u8]) -> Result<GamModel, FormatError> {
    let model = parse_model(bytes)?;
    model.recenter().map_err(|e| match e {
        ModelError::NoTrainingMass(name) => {
            let i = model.feature_index(&name).unwrap_or_default();
            FormatError::new(
                format!("features[{i}].counts"),
                format!("feature `{name}` has no training mass; cannot re-center"),
            )
        }
        other => FormatError::new("$", other.to_string()),
    })
}
