//! The `.gam.json` model document.
//!
//! ```json
//! {"version":1,"task":"classification","link":"logit","intercept":-1.2,
//!  "features":[
//!    {"name":"age","type":"continuous","bin_edges":[18,65],"scores":[-0.4,0.5],"counts":[90,10]},
//!    {"name":"asthma","type":"categorical","levels":["yes","no"],"scores":[-0.2,0.1],"counts":[5,95],
//!     "stderr":[0.05,null]}],
//!  "interactions":[
//!    {"feature_i":"age","feature_j":"asthma","axis_i":{"bin_edges":[18]},
//!     "axis_j":{"levels":["yes","no"]},"score_matrix":[[0.01,-0.01]]}]}
//! ```

use serde_json::{json, Map, Value};

use crate::model::{
    Axis, CategoricalShape, ContinuousShape, GamModel, InteractionTerm, Link, ModelError, Shape,
    Task,
};

use super::FormatError;

pub const MODEL_VERSION: u64 = 1;

const TOP_KEYS: [&str; 6] = ["version", "task", "link", "intercept", "features", "interactions"];

/// Parses and validates a model document without re-centering.
pub fn parse_model(bytes: &[u8]) -> Result<GamModel, FormatError> {
    let value: Value = serde_json::from_slice(bytes).map_err(FormatError::syntax)?;
    model_from_value(&value, "")
}

/// Model from an already-parsed document; `root` prefixes every error path.
pub fn model_from_value(value: &Value, root: &str) -> Result<GamModel, FormatError> {
    let at = |key: &str| join(root, key);
    let obj = value
        .as_object()
        .ok_or_else(|| FormatError::new(root_or_dollar(root), "model document must be an object"))?;
    for key in obj.keys() {
        if !TOP_KEYS.contains(&key.as_str()) {
            return Err(FormatError::new(
                at(key),
                format!("unknown key `{key}` for model document version {MODEL_VERSION}"),
            ));
        }
    }
    let version = require(obj, "version", root)?;
    if version.as_u64() != Some(MODEL_VERSION) {
        return Err(FormatError::new(
            at("version"),
            format!("unsupported version {version}; expected {MODEL_VERSION}"),
        ));
    }
    let task = match require(obj, "task", root)?.as_str() {
        Some("classification") => Task::Classification,
        Some("regression") => Task::Regression,
        _ => {
            return Err(FormatError::new(
                at("task"),
                "expected \"classification\" or \"regression\"",
            ))
        }
    };
    let link = match require(obj, "link", root)?.as_str() {
        Some("logit") => Link::Logit,
        Some("identity") => Link::Identity,
        _ => return Err(FormatError::new(at("link"), "expected \"logit\" or \"identity\"")),
    };
    let intercept = number(require(obj, "intercept", root)?, &at("intercept"))?;
    let features = require(obj, "features", root)?
        .as_array()
        .ok_or_else(|| FormatError::new(at("features"), "expected an array"))?;
    let shapes = features
        .iter()
        .enumerate()
        .map(|(i, f)| shape_from_value(f, &at(&format!("features[{i}]"))))
        .collect::<Result<Vec<_>, _>>()?;
    let interactions = match obj.get("interactions") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(k, t)| interaction_from_value(t, &at(&format!("interactions[{k}]"))))
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(FormatError::new(at("interactions"), "expected an array")),
    };
    GamModel::new(task, link, intercept, shapes, interactions).map_err(|e| match e {
        ModelError::Invalid { path, message } => FormatError::new(join(root, &path), message),
        other => FormatError::new(root_or_dollar(root), other.to_string()),
    })
}

fn shape_from_value(value: &Value, path: &str) -> Result<Shape, FormatError> {
    let obj = value
        .as_object()
        .ok_or_else(|| FormatError::new(path, "feature must be an object"))?;
    let at = |key: &str| format!("{path}.{key}");
    let name = require(obj, "name", path)?
        .as_str()
        .ok_or_else(|| FormatError::new(at("name"), "expected a string"))?
        .to_string();
    let kind = require(obj, "type", path)?.as_str();
    let allowed: &[&str] = match kind {
        Some("continuous") => &["name", "type", "bin_edges", "scores", "counts", "stderr"],
        Some("categorical") => &["name", "type", "levels", "scores", "counts", "stderr"],
        _ => {
            return Err(FormatError::new(
                at("type"),
                "expected \"continuous\" or \"categorical\"",
            ))
        }
    };
    if let Some(key) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(FormatError::new(at(key), format!("unknown key `{key}`")));
    }
    let scores = numbers(require(obj, "scores", path)?, &at("scores"))?;
    let counts = counts(require(obj, "counts", path)?, &at("counts"))?;
    let stderr = match obj.get("stderr") {
        None | Some(Value::Null) => None,
        Some(v) => Some(optional_numbers(v, &at("stderr"))?),
    };
    let shape = if kind == Some("continuous") {
        let edges = numbers(require(obj, "bin_edges", path)?, &at("bin_edges"))?;
        Shape::Continuous(ContinuousShape {
            name,
            bin_edges: edges,
            scores,
            counts,
            stderr,
        })
    } else {
        let levels = strings(require(obj, "levels", path)?, &at("levels"))?;
        Shape::Categorical(CategoricalShape {
            name,
            levels,
            scores,
            counts,
            stderr,
        })
    };
    Ok(shape)
}

fn interaction_from_value(value: &Value, path: &str) -> Result<InteractionTerm, FormatError> {
    let obj = value
        .as_object()
        .ok_or_else(|| FormatError::new(path, "interaction must be an object"))?;
    let at = |key: &str| format!("{path}.{key}");
    const KEYS: [&str; 5] = ["feature_i", "feature_j", "axis_i", "axis_j", "score_matrix"];
    if let Some(key) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(FormatError::new(at(key), format!("unknown key `{key}`")));
    }
    let name = |key: &str| -> Result<String, FormatError> {
        require(obj, key, path)?
            .as_str()
            .map(String::from)
            .ok_or_else(|| FormatError::new(at(key), "expected a string"))
    };
    let axis = |key: &str| -> Result<Axis, FormatError> {
        let p = at(key);
        let a = require(obj, key, path)?
            .as_object()
            .ok_or_else(|| FormatError::new(&p, "expected an object"))?;
        match (a.get("bin_edges"), a.get("levels"), a.len()) {
            (Some(e), None, 1) => Ok(Axis::Continuous {
                bin_edges: numbers(e, &format!("{p}.bin_edges"))?,
            }),
            (None, Some(l), 1) => Ok(Axis::Categorical {
                levels: strings(l, &format!("{p}.levels"))?,
            }),
            _ => Err(FormatError::new(
                p,
                "axis must have exactly one of `bin_edges` or `levels`",
            )),
        }
    };
    let matrix_path = at("score_matrix");
    let rows = require(obj, "score_matrix", path)?
        .as_array()
        .ok_or_else(|| FormatError::new(&matrix_path, "expected an array of rows"))?;
    let scores = rows
        .iter()
        .enumerate()
        .map(|(r, row)| numbers(row, &format!("{matrix_path}[{r}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InteractionTerm::new(
        name("feature_i")?,
        name("feature_j")?,
        axis("axis_i")?,
        axis("axis_j")?,
        scores,
    ))
}

fn join(root: &str, key: &str) -> String {
    if root.is_empty() {
        key.to_string()
    } else if key.starts_with('[') {
        format!("{root}{key}")
    } else {
        format!("{root}.{key}")
    }
}

fn root_or_dollar(root: &str) -> &str {
    if root.is_empty() {
        "$"
    } else {
        root
    }
}

fn require<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, FormatError> {
    obj.get(key)
        .ok_or_else(|| FormatError::new(join(path, key), "required field is missing"))
}

fn number(v: &Value, path: &str) -> Result<f64, FormatError> {
    v.as_f64()
        .ok_or_else(|| FormatError::new(path, "expected a number"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, FormatError> {
    v.as_array()
        .ok_or_else(|| FormatError::new(path, "expected an array"))
}

fn numbers(v: &Value, path: &str) -> Result<Vec<f64>, FormatError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

fn optional_numbers(v: &Value, path: &str) -> Result<Vec<Option<f64>>, FormatError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| match x {
            Value::Null => Ok(None),
            x => number(x, &format!("{path}[{i}]")).map(Some),
        })
        .collect()
}

fn counts(v: &Value, path: &str) -> Result<Vec<u64>, FormatError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_u64().ok_or_else(|| {
                FormatError::new(format!("{path}[{i}]"), "expected a non-negative integer")
            })
        })
        .collect()
}

fn strings(v: &Value, path: &str) -> Result<Vec<String>, FormatError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str()
                .map(String::from)
                .ok_or_else(|| FormatError::new(format!("{path}[{i}]"), "expected a string"))
        })
        .collect()
}

pub fn model_to_value(model: &GamModel) -> Value {
    let features: Vec<Value> = model
        .shapes()
        .iter()
        .map(|shape| {
            let mut f = match shape {
                Shape::Continuous(s) => json!({
                    "name": s.name(),
                    "type": "continuous",
                    "bin_edges": s.bin_edges(),
                    "scores": s.scores(),
                    "counts": s.counts(),
                }),
                Shape::Categorical(s) => json!({
                    "name": s.name(),
                    "type": "categorical",
                    "levels": s.levels(),
                    "scores": s.scores(),
                    "counts": s.counts(),
                }),
            };
            if let Some(stderr) = shape.stderr() {
                f["stderr"] = json!(stderr);
            }
            f
        })
        .collect();
    let mut doc = json!({
        "version": MODEL_VERSION,
        "task": model.task(),
        "link": model.link(),
        "intercept": model.intercept(),
        "features": features,
    });
    if !model.interactions().is_empty() {
        let axis = |a: &Axis| match a {
            Axis::Continuous { bin_edges } => json!({ "bin_edges": bin_edges }),
            Axis::Categorical { levels } => json!({ "levels": levels }),
        };
        doc["interactions"] = model
            .interactions()
            .iter()
            .map(|t| {
                let (fi, fj) = t.features();
                let (ai, aj) = t.axes();
                json!({
                    "feature_i": fi,
                    "feature_j": fj,
                    "axis_i": axis(ai),
                    "axis_j": axis(aj),
                    "score_matrix": t.scores(),
                })
            })
            .collect();
    }
    doc
}

/// Canonical document bytes.
pub fn model_to_bytes(model: &GamModel) -> Vec<u8> {
    super::canonical::canonical_json(&model_to_value(model)).into_bytes()
}
