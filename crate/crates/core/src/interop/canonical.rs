//! Canonical JSON: sorted keys, no whitespace, shortest round-trip numbers.
//!
//! Canonical bytes back commit ids and every byte-equality check. The
//! domain types reject non-finite numbers at construction, so anything that
//! reaches this module is representable.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::edit::EditDescriptor;
use crate::model::GamModel;

use super::model_doc::model_to_value;

pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out
}

fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            out.push('{');
            for (i, (k, v)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("string keys serialize"));
                out.push(':');
                write_value(v, out);
            }
            out.push('}');
        }
        // serde_json prints floats with ryu (shortest round-trip) and
        // integers verbatim.
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalars serialize")),
    }
}

pub fn to_canonical<T: Serialize>(value: &T) -> serde_json::Result<String> {
    Ok(canonical_json(&serde_json::to_value(value)?))
}

/// `{parent}{descriptor}{snapshot}` as canonical JSON, `null` for absent parts.
pub fn commit_preimage(
    parent: Option<&str>,
    descriptor: Option<&EditDescriptor>,
    snapshot: &GamModel,
) -> Vec<u8> {
    let parent = parent.map_or(Value::Null, |p| Value::String(p.to_string()));
    let descriptor = descriptor.map_or(Value::Null, |d| {
        serde_json::to_value(d).expect("descriptor serializes")
    });
    let mut bytes = canonical_json(&parent).into_bytes();
    bytes.extend(canonical_json(&descriptor).into_bytes());
    bytes.extend(canonical_json(&model_to_value(snapshot)).into_bytes());
    bytes
}

/// First 8 hex characters of SHA-256 over the commit preimage.
pub fn commit_id(
    parent: Option<&str>,
    descriptor: Option<&EditDescriptor>,
    snapshot: &GamModel,
) -> String {
    let digest = Sha256::digest(commit_preimage(parent, descriptor, snapshot));
    hex::encode(&digest[..4])
}
