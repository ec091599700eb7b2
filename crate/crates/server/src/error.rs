use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use gamwb_core::edit::EditError;
use gamwb_core::history::HistoryError;
use gamwb_core::metrics::MetricsError;

/// Error body: `{"code": "...", "message": "...", "ids": [...]?}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ids: Option<Vec<String>>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            ids: None,
        }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn conflict(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<EditError> for ApiError {
    fn from(e: EditError) -> Self {
        let message = e.to_string();
        match e {
            EditError::UnknownFeature(_) => ApiError::not_found("unknown_feature", message),
            EditError::UnknownLevel { .. } => ApiError::bad_request("unknown_level", message),
            EditError::BadRange { .. } => ApiError::bad_request("bad_range", message),
            EditError::EmptySelection => ApiError::bad_request("empty_selection", message),
            EditError::TargetKind { .. } => ApiError::bad_request("selection_kind", message),
            EditError::NotApplicable { .. } => ApiError::bad_request("tool_not_applicable", message),
            EditError::NeedsTwoBins(_) => ApiError::bad_request("selection_too_narrow", message),
            EditError::NoReferenceBin(_) => ApiError::bad_request("no_reference_bin", message),
            EditError::NonFiniteParameter(_) => ApiError::bad_request("bad_parameter", message),
            EditError::Isotonic(_) => ApiError::bad_request("isotonic", message),
        }
    }
}

impl From<HistoryError> for ApiError {
    fn from(e: HistoryError) -> Self {
        let message = e.to_string();
        match e {
            HistoryError::NoWorkingEdit => ApiError::conflict("no_working_edit", message),
            HistoryError::UnknownCommit(_) => ApiError::not_found("unknown_commit", message),
            HistoryError::AlreadyAtRoot => ApiError::conflict("already_at_root", message),
            HistoryError::AlreadyAtTip => ApiError::conflict("already_at_tip", message),
            HistoryError::DeleteRoot => ApiError::conflict("delete_root", message),
            HistoryError::Unconfirmed(ids) => ApiError {
                ids: Some(ids),
                ..ApiError::conflict("unconfirmed", message)
            },
            HistoryError::Edit(e) => e.into(),
        }
    }
}

impl From<MetricsError> for ApiError {
    fn from(e: MetricsError) -> Self {
        let message = e.to_string();
        match e {
            MetricsError::NoSelection => ApiError::conflict("no_selection", message),
            MetricsError::UnknownFeature(_) => ApiError::not_found("unknown_feature", message),
            MetricsError::NotCategorical(_) => ApiError::bad_request("not_categorical", message),
            MetricsError::UnknownLevel { .. } => ApiError::bad_request("unknown_level", message),
            MetricsError::EmptyScope => ApiError::bad_request("empty_scope", message),
            _ => ApiError::bad_request("metrics", message),
        }
    }
}
