//! Save bundles: the head model plus the full commit history.
//!
//! ```json
//! {"version":1,"model":{...},"history":[
//!   {"id":"3f2a9c1e","parent":null,"timestamp":"2024-05-01T12:00:00.000Z",
//!    "message":"Loaded model","confirmed":true,"descriptor":null,"snapshot":{...}}]}
//! ```
//!
//! Snapshots are authoritative. Loading re-derives ids and checks the
//! parent chain, but a descriptor that no longer reproduces its snapshot is
//! only reported as a warning.

use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde_json::{json, Map, Value};

use crate::edit::{DescriptorDoc, EditDescriptor};
use crate::history::{Commit, HistoryError, Session};

use super::canonical::{canonical_json, commit_id};
use super::model_doc::{model_from_value, model_to_value};
use super::FormatError;

pub const BUNDLE_VERSION: u64 = 1;

const TOP_KEYS: [&str; 3] = ["version", "model", "history"];
const COMMIT_KEYS: [&str; 7] = [
    "id",
    "parent",
    "timestamp",
    "message",
    "confirmed",
    "descriptor",
    "snapshot",
];

#[derive(Debug, Clone)]
pub struct LoadedBundle {
    pub session: Session,
    pub warnings: Vec<String>,
}

/// Serializes the session. Refuses while any edit is unconfirmed.
pub fn save_bundle(session: &Session) -> Result<Vec<u8>, HistoryError> {
    session.ensure_confirmed()?;
    Ok(bundle_string(session).into_bytes())
}

fn bundle_string(session: &Session) -> String {
    let history: Vec<Value> = session
        .commits()
        .iter()
        .map(|c| {
            json!({
                "id": c.id(),
                "parent": c.parent(),
                "timestamp": c.timestamp_string(),
                "message": c.message(),
                "confirmed": c.confirmed(),
                "descriptor": c.descriptor().map(|d| {
                    serde_json::to_value(d).expect("descriptor serializes")
                }),
                "snapshot": model_to_value(c.snapshot()),
            })
        })
        .collect();
    let doc = json!({
        "version": BUNDLE_VERSION,
        "model": model_to_value(session.last()),
        "history": history,
    });
    canonical_json(&doc)
}

pub fn load_bundle(bytes: &[u8]) -> Result<LoadedBundle, FormatError> {
    let value: Value = serde_json::from_slice(bytes).map_err(FormatError::syntax)?;
    let obj = value
        .as_object()
        .ok_or_else(|| FormatError::new("$", "bundle must be an object"))?;
    check_keys(obj, &TOP_KEYS, "")?;
    if obj.get("version").and_then(Value::as_u64) != Some(BUNDLE_VERSION) {
        return Err(FormatError::new(
            "version",
            format!("missing or unsupported version; expected {BUNDLE_VERSION}"),
        ));
    }
    let model_value = obj
        .get("model")
        .ok_or_else(|| FormatError::new("model", "required field is missing"))?;
    let model = model_from_value(model_value, "model")?;
    let history = obj
        .get("history")
        .ok_or_else(|| FormatError::new("history", "required field is missing"))?
        .as_array()
        .ok_or_else(|| FormatError::new("history", "expected an array"))?;
    if history.is_empty() {
        return Err(FormatError::new("history", "history must contain the root commit"));
    }

    let mut commits: Vec<Commit> = Vec::with_capacity(history.len());
    let mut warnings = Vec::new();
    for (k, entry) in history.iter().enumerate() {
        let path = format!("history[{k}]");
        let commit = commit_from_value(entry, &path, commits.last(), &mut warnings)?;
        commits.push(commit);
    }

    let head_bytes = canonical_json(&model_to_value(&model));
    let head = commits
        .iter()
        .rposition(|c| canonical_json(&model_to_value(c.snapshot())) == head_bytes)
        .ok_or_else(|| FormatError::new("model", "model does not match any history snapshot"))?;
    Ok(LoadedBundle {
        session: Session::from_parts(commits, head),
        warnings,
    })
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], root: &str) -> Result<(), FormatError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(key) if root.is_empty() => Err(FormatError::new(key.as_str(), format!("unknown key `{key}`"))),
        Some(key) => Err(FormatError::new(format!("{root}.{key}"), format!("unknown key `{key}`"))),
        None => Ok(()),
    }
}

fn commit_from_value(
    value: &Value,
    path: &str,
    previous: Option<&Commit>,
    warnings: &mut Vec<String>,
) -> Result<Commit, FormatError> {
    let at = |key: &str| format!("{path}.{key}");
    let obj = value
        .as_object()
        .ok_or_else(|| FormatError::new(path, "commit must be an object"))?;
    check_keys(obj, &COMMIT_KEYS, path)?;
    let field = |key: &str| obj.get(key).ok_or_else(|| FormatError::new(at(key), "required field is missing"));

    let id = field("id")?
        .as_str()
        .ok_or_else(|| FormatError::new(at("id"), "expected a string"))?
        .to_string();
    let parent = match field("parent")? {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        _ => return Err(FormatError::new(at("parent"), "expected a string or null")),
    };
    let expected_parent = previous.map(|c| c.id());
    if parent.as_deref() != expected_parent {
        return Err(FormatError::new(
            at("parent"),
            match expected_parent {
                Some(p) => format!("expected parent `{p}`"),
                None => "the root commit must have a null parent".to_string(),
            },
        ));
    }
    let timestamp = field("timestamp")?
        .as_str()
        .and_then(|s| DateTime::parse_from_rfc3339(s).ok())
        .ok_or_else(|| FormatError::new(at("timestamp"), "expected an ISO-8601 timestamp"))?
        .with_timezone(&Utc);
    let message = field("message")?
        .as_str()
        .ok_or_else(|| FormatError::new(at("message"), "expected a string"))?
        .to_string();
    let confirmed = field("confirmed")?
        .as_bool()
        .ok_or_else(|| FormatError::new(at("confirmed"), "expected a boolean"))?;
    let descriptor = match field("descriptor")? {
        Value::Null => None,
        v => {
            let doc: DescriptorDoc = serde_json::from_value(v.clone())
                .map_err(|e| FormatError::new(at("descriptor"), e.to_string()))?;
            Some(EditDescriptor::try_from(doc).map_err(|e| FormatError::new(at("descriptor"), e))?)
        }
    };
    match (&previous, &descriptor) {
        (None, Some(_)) => {
            return Err(FormatError::new(at("descriptor"), "the root commit has no descriptor"))
        }
        (Some(_), None) => return Err(FormatError::new(at("descriptor"), "required for non-root commits")),
        _ => {}
    }
    let snapshot = model_from_value(field("snapshot")?, &at("snapshot"))?;

    let derived = commit_id(parent.as_deref(), descriptor.as_ref(), &snapshot);
    if derived != id {
        return Err(FormatError::new(
            at("id"),
            format!("id `{id}` does not match content (expected `{derived}`)"),
        ));
    }

    if let (Some(prev), Some(d)) = (previous, &descriptor) {
        let replayed = d.apply(prev.snapshot());
        let same = replayed
            .as_ref()
            .is_ok_and(|m| canonical_json(&model_to_value(m)) == canonical_json(&model_to_value(&snapshot)));
        if !same {
            warnings.push(format!(
                "{path}: commit {id} does not reproduce its snapshot when replayed; keeping the stored snapshot"
            ));
        }
    }

    Ok(Commit {
        id,
        parent,
        timestamp: DateTime::from_timestamp_millis(timestamp.timestamp_millis()).unwrap_or(timestamp),
        message,
        confirmed,
        descriptor,
        snapshot: Arc::new(snapshot),
    })
}
