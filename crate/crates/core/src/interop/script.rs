//! `.edits.json` batch edit scripts.
//!
//! ```json
//! {"version":1,"edits":[
//!   {"feature":"age","selection":{"bins":[3,7]},"tool":"interpolate","message":"smooth 81-87"},
//!   {"feature":"asthma","selection":{"levels":["yes"]},"tool":"set_constant","params":{"value":0}}]}
//! ```

use serde::Deserialize;
use serde_json::Value;

use crate::edit::{tool_from_parts, EditDescriptor, ParamsDoc, Region, TargetDoc, ToolName};
use crate::model::GamModel;

use super::FormatError;

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptEntry {
    pub descriptor: EditDescriptor,
    pub message: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    feature: String,
    selection: TargetDoc,
    tool: ToolName,
    #[serde(default)]
    params: Option<ParamsDoc>,
    #[serde(default)]
    message: Option<String>,
}

/// Parses a script and validates every entry against `model`.
pub fn parse_edit_script(bytes: &[u8], model: &GamModel) -> Result<Vec<ScriptEntry>, FormatError> {
    let value: Value = serde_json::from_slice(bytes).map_err(FormatError::syntax)?;
    let obj = value
        .as_object()
        .ok_or_else(|| FormatError::new("$", "edit script must be an object"))?;
    if let Some(key) = obj.keys().find(|k| *k != "edits" && *k != "version") {
        return Err(FormatError::new(key.as_str(), format!("unknown key `{key}`")));
    }
    if let Some(v) = obj.get("version") {
        if v.as_u64() != Some(1) {
            return Err(FormatError::new("version", "unsupported version; expected 1"));
        }
    }
    let edits = obj
        .get("edits")
        .ok_or_else(|| FormatError::new("edits", "required field is missing"))?
        .as_array()
        .ok_or_else(|| FormatError::new("edits", "expected an array"))?;
    edits
        .iter()
        .enumerate()
        .map(|(k, entry)| {
            let path = format!("edits[{k}]");
            let doc: EntryDoc = serde_json::from_value(entry.clone())
                .map_err(|e| FormatError::new(&path, e.to_string()))?;
            let region = Region::new(model, &doc.feature, doc.selection.into())
                .map_err(|e| FormatError::new(format!("{path}.selection"), e.to_string()))?;
            let tool = tool_from_parts(doc.tool, doc.params.as_ref())
                .map_err(|e| FormatError::new(format!("{path}.params"), e))?;
            let descriptor = EditDescriptor::new(region, tool);
            descriptor
                .validate(model)
                .map_err(|e| FormatError::new(&path, e.to_string()))?;
            Ok(ScriptEntry {
                descriptor,
                message: doc.message,
            })
        })
        .collect()
}
