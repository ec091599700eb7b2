//! The JSON API. Every handler maps onto one engine operation; the lock
//! makes writes single-file and gives reads a consistent snapshot.

use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use gamwb_core::correlation::rank_correlated_features;
use gamwb_core::edit::{select, tool_from_parts, ParamsDoc, Selection, Target, TargetDoc, ToolName};
use gamwb_core::history::{Commit, Session};
use gamwb_core::interop::save_bundle;
use gamwb_core::metrics::{baseline_reports, resolve_scope, MetricReport, ScopeSpec};
use gamwb_core::model::{FeatureKind, GamModel, Shape};
use gamwb_core::{EditDescriptor, EncodedDataset};

use crate::error::ApiError;

/// The single editing session a server process owns.
pub struct Workbench {
    pub session: Session,
    pub data: EncodedDataset,
    pub selection: Option<Selection>,
}

impl Workbench {
    pub fn new(session: Session, data: EncodedDataset) -> Self {
        Workbench {
            session,
            data,
            selection: None,
        }
    }

    fn reports(&self, scope: &ScopeSpec) -> Result<Vec<MetricReport>, ApiError> {
        let s = &self.session;
        let rows = resolve_scope(s.current(), &self.data, scope, self.selection.as_ref())?;
        Ok(baseline_reports(s.original(), s.last(), s.current(), &self.data, &rows)?.to_vec())
    }

    /// Reports for a scope that may legitimately be empty.
    fn reports_or_null(&self, scope: &ScopeSpec) -> Result<Value, ApiError> {
        match self.reports(scope) {
            Ok(r) => Ok(json!(r)),
            Err(e) if e.code == "empty_scope" => Ok(Value::Null),
            Err(e) => Err(e),
        }
    }
}

pub type SharedWorkbench = Arc<RwLock<Workbench>>;

type ApiResult = Result<Response, ApiError>;

fn read(state: &SharedWorkbench) -> RwLockReadGuard<'_, Workbench> {
    state.read().unwrap_or_else(|e| e.into_inner())
}

fn write(state: &SharedWorkbench) -> RwLockWriteGuard<'_, Workbench> {
    state.write().unwrap_or_else(|e| e.into_inner())
}

fn ok(value: Value) -> ApiResult {
    Ok(Json(value).into_response())
}

/// Parses a JSON body into `T`, reporting problems in the API error shape.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    let bytes: &[u8] = if bytes.is_empty() { b"{}" } else { bytes };
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request("bad_request", e.to_string()))
}

pub fn router(workbench: Workbench) -> Router {
    let state: SharedWorkbench = Arc::new(RwLock::new(workbench));
    Router::new()
        .route("/api/model/summary", get(summary))
        .route("/api/feature/{name}", get(feature))
        .route("/api/selection", post(set_selection).delete(clear_selection))
        .route("/api/edit/preview", post(preview))
        .route("/api/edit/commit", post(commit))
        .route("/api/edit/discard", post(discard))
        .route("/api/metrics", get(metrics))
        .route("/api/history", get(history))
        .route("/api/history/checkout", post(checkout))
        .route("/api/history/undo", post(undo))
        .route("/api/history/redo", post(redo))
        .route("/api/history/{id}", axum::routing::delete(delete_commit).patch(patch_commit))
        .route("/api/save", post(save))
        .with_state(state)
}

fn kind_name(kind: FeatureKind) -> &'static str {
    match kind {
        FeatureKind::Continuous => "continuous",
        FeatureKind::Categorical => "categorical",
    }
}

async fn summary(State(state): State<SharedWorkbench>) -> ApiResult {
    let wb = read(&state);
    let model = wb.session.current();
    let ranking = model
        .importance_ranking()
        .map_err(|e| ApiError::bad_request("model", e.to_string()))?;
    let features: Vec<Value> = ranking
        .into_iter()
        .map(|(name, importance)| {
            let shape = model.shape(&name).expect("ranked from this model");
            json!({
                "name": name,
                "kind": kind_name(shape.kind()),
                "bins": shape.len(),
                "importance": importance,
            })
        })
        .collect();
    let interactions: Vec<Value> = model
        .interactions()
        .iter()
        .map(|t| json!({"feature_i": t.features().0, "feature_j": t.features().1}))
        .collect();
    ok(json!({
        "task": model.task(),
        "link": model.link(),
        "intercept": model.intercept(),
        "sample_count": wb.data.len(),
        "unknown_levels": wb.data.unknown_levels().0,
        "features": features,
        "interactions": interactions,
    }))
}

fn scores_of(model: &GamModel, name: &str) -> Vec<f64> {
    model.shape(name).map(|s| s.scores().to_vec()).unwrap_or_default()
}

fn score_series(session: &Session, name: &str) -> Value {
    json!({
        "original": scores_of(session.original(), name),
        "last": scores_of(session.last(), name),
        "current": scores_of(session.current(), name),
    })
}

async fn feature(State(state): State<SharedWorkbench>, Path(name): Path<String>) -> ApiResult {
    let wb = read(&state);
    let model = wb.session.current();
    let shape = model
        .shape(&name)
        .map_err(|e| ApiError::not_found("unknown_feature", e.to_string()))?;
    let mut out = json!({
        "name": name,
        "kind": kind_name(shape.kind()),
        "counts": shape.counts(),
        "stderr": shape.stderr(),
        "scores": score_series(&wb.session, &name),
        "importance": model.feature_importance(&name).ok(),
    });
    match shape {
        Shape::Continuous(s) => out["bin_edges"] = json!(s.bin_edges()),
        Shape::Categorical(s) => out["levels"] = json!(s.levels()),
    }
    ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectionBody {
    feature: String,
    bins: Option<[usize; 2]>,
    levels: Option<Vec<String>>,
}

fn selection_view(wb: &Workbench, sel: &Selection) -> Result<Value, ApiError> {
    Ok(json!({
        "feature": sel.feature(),
        "selection": TargetDoc::from(sel.region().target().clone()),
        "sample_count": sel.sample_count(),
        "correlation": rank_correlated_features(wb.session.current(), &wb.data, sel),
        "reports": wb.reports_or_null(&ScopeSpec::Selected)?,
    }))
}

async fn set_selection(State(state): State<SharedWorkbench>, bytes: Bytes) -> ApiResult {
    let req: SelectionBody = body(&bytes)?;
    let target = match (req.bins, req.levels) {
        (Some([s, e]), None) => Target::Bins(s, e),
        (None, Some(levels)) => Target::Levels(levels),
        _ => {
            return Err(ApiError::bad_request(
                "bad_request",
                "give exactly one of `bins` or `levels`",
            ))
        }
    };
    let mut wb = write(&state);
    let sel = select(wb.session.current(), &wb.data, &req.feature, target)?;
    let previous = wb.selection.replace(sel);
    let view = selection_view(&wb, wb.selection.as_ref().expect("just set"));
    if view.is_err() {
        wb.selection = previous;
    }
    ok(view?)
}

async fn clear_selection(State(state): State<SharedWorkbench>) -> ApiResult {
    write(&state).selection = None;
    Ok(StatusCode::NO_CONTENT.into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PreviewBody {
    tool: ToolName,
    #[serde(default)]
    params: Option<ParamsDoc>,
    #[serde(default)]
    scope: Option<ScopeSpec>,
}

async fn preview(State(state): State<SharedWorkbench>, bytes: Bytes) -> ApiResult {
    let req: PreviewBody = body(&bytes)?;
    let tool = tool_from_parts(req.tool, req.params.as_ref())
        .map_err(|m| ApiError::bad_request("bad_parameter", m))?;
    let mut wb = write(&state);
    let sel = wb
        .selection
        .as_ref()
        .ok_or_else(|| ApiError::conflict("no_selection", "select bins or levels first"))?;
    let descriptor = EditDescriptor::new(sel.region().clone(), tool);
    descriptor.validate(wb.session.last())?;
    let feature = sel.feature().to_string();
    let sample_count = sel.sample_count();
    let scope = req.scope.unwrap_or(ScopeSpec::Selected);
    // validate the scope before touching the working model
    let probe = resolve_scope(wb.session.last(), &wb.data, &scope, wb.selection.as_ref());
    if let Err(e) = probe {
        let e = ApiError::from(e);
        if e.code != "empty_scope" {
            return Err(e);
        }
    }
    wb.session.preview(descriptor, sample_count)?;
    ok(json!({
        "feature": feature,
        "sample_count": sample_count,
        "scores": score_series(&wb.session, &feature),
        "scope": scope,
        "reports": wb.reports_or_null(&scope)?,
    }))
}

fn commit_view(c: &Commit, head: bool) -> Value {
    json!({
        "id": c.id(),
        "parent": c.parent(),
        "timestamp": c.timestamp_string(),
        "message": c.message(),
        "confirmed": c.confirmed(),
        "descriptor": c.descriptor(),
        "head": head,
    })
}

fn history_view(session: &Session) -> Value {
    let head = session.head();
    json!({
        "head": session.head_commit().id(),
        "working": session.working().is_some(),
        "commits": session
            .commits()
            .iter()
            .enumerate()
            .map(|(i, c)| commit_view(c, i == head))
            .collect::<Vec<_>>(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CommitBody {
    #[serde(default)]
    message: Option<String>,
}

async fn commit(State(state): State<SharedWorkbench>, bytes: Bytes) -> ApiResult {
    let req: CommitBody = body(&bytes)?;
    let mut wb = write(&state);
    let c = wb.session.commit(req.message)?;
    ok(commit_view(c, true))
}

async fn discard(State(state): State<SharedWorkbench>) -> ApiResult {
    write(&state).session.discard();
    Ok(StatusCode::NO_CONTENT.into_response())
}

#[derive(Deserialize)]
struct MetricsQuery {
    #[serde(default)]
    scope: Option<String>,
    #[serde(default)]
    slice_feature: Option<String>,
    #[serde(default)]
    slice_level: Option<String>,
}

async fn metrics(State(state): State<SharedWorkbench>, Query(q): Query<MetricsQuery>) -> ApiResult {
    let scope = match q.scope.as_deref().unwrap_or("global") {
        "global" => ScopeSpec::Global,
        "selected" => ScopeSpec::Selected,
        "slice" => match (q.slice_feature, q.slice_level) {
            (Some(feature), Some(level)) => ScopeSpec::Slice { feature, level },
            _ => {
                return Err(ApiError::bad_request(
                    "bad_request",
                    "slice scope needs slice_feature and slice_level",
                ))
            }
        },
        other => {
            return Err(ApiError::bad_request(
                "bad_request",
                format!("unknown scope `{other}`; expected global, selected or slice"),
            ))
        }
    };
    let wb = read(&state);
    let reports = wb.reports(&scope)?;
    ok(json!({"scope": scope, "reports": reports}))
}

async fn history(State(state): State<SharedWorkbench>) -> ApiResult {
    ok(history_view(&read(&state).session))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckoutBody {
    id: String,
}

async fn checkout(State(state): State<SharedWorkbench>, bytes: Bytes) -> ApiResult {
    let req: CheckoutBody = body(&bytes)?;
    let mut wb = write(&state);
    wb.session.checkout(&req.id)?;
    ok(history_view(&wb.session))
}

async fn undo(State(state): State<SharedWorkbench>) -> ApiResult {
    let mut wb = write(&state);
    wb.session.undo()?;
    ok(history_view(&wb.session))
}

async fn redo(State(state): State<SharedWorkbench>) -> ApiResult {
    let mut wb = write(&state);
    wb.session.redo()?;
    ok(history_view(&wb.session))
}

async fn delete_commit(State(state): State<SharedWorkbench>, Path(id): Path<String>) -> ApiResult {
    let mut wb = write(&state);
    wb.session.delete_commit(&id)?;
    ok(history_view(&wb.session))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchBody {
    #[serde(default)]
    message: Option<String>,
    #[serde(default)]
    confirmed: Option<bool>,
}

async fn patch_commit(
    State(state): State<SharedWorkbench>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult {
    let req: PatchBody = body(&bytes)?;
    let mut wb = write(&state);
    // resolve the id first so a bad id changes nothing
    wb.session.commit_by_id(&id)?;
    if let Some(message) = req.message {
        wb.session.set_message(&id, message)?;
    }
    if let Some(confirmed) = req.confirmed {
        wb.session.set_confirmed(&id, confirmed)?;
    }
    let head = wb.session.head_commit().id() == id;
    ok(commit_view(wb.session.commit_by_id(&id)?, head))
}

async fn save(State(state): State<SharedWorkbench>) -> ApiResult {
    let bytes = save_bundle(&read(&state).session)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response())
}
