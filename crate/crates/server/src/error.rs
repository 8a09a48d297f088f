use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use huntboard_core::checklist::TemplateError;
use huntboard_core::hub::{HubError, SubmitError};
use huntboard_core::report::ReportError;
use huntboard_core::view::ViewError;
use huntboard_core::{BoardId, OpError};
use serde_json::json;

pub const SEQ_HEADER: &str = "x-board-seq";

/// An error response: `{"error":{"code","message"}}` plus the board seq when known.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub seq: Option<u64>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            status,
            code: code.into(),
            message: message.into(),
            seq: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "MissingActor", "x-actor-id header is required")
    }

    pub fn board_not_found(board: &BoardId) -> Self {
        Self::new(StatusCode::NOT_FOUND, "BoardNotFound", format!("board {board} not found"))
    }

    pub fn with_seq(mut self, seq: Option<u64>) -> Self {
        self.seq = seq;
        self
    }
}

pub fn op_status(err: &OpError) -> StatusCode {
    use OpError::*;
    match err {
        EmptyName | EmptyTitle | EmptyText | InvalidPeriod(_) | SelfLoop(_) | NonFiniteCoordinate
        | EmptySelection | EmptyTemplateItem | NotPlaceable(_) => StatusCode::BAD_REQUEST,
        NotFound(_) | ItemNotFound(_) | NoSavedView(_) => StatusCode::NOT_FOUND,
        CanvasForbidden(_) | NotOwner(_) => StatusCode::FORBIDDEN,
        Archived(_) | AlreadyClosed(_) | EndpointArchived(_) | AlreadyPlaced { .. } | NotPlaced { .. }
        | ActiveChecklistExists(_) | NotActive(_) | PendingItems { .. } => StatusCode::CONFLICT,
    }
}

impl From<OpError> for ApiError {
    fn from(err: OpError) -> Self {
        ApiError::new(op_status(&err), err.code(), err.to_string())
    }
}

impl From<SubmitError> for ApiError {
    fn from(err: SubmitError) -> Self {
        match err {
            SubmitError::BoardNotFound(b) => ApiError::board_not_found(&b),
            SubmitError::Rejected(e) => e.into(),
            SubmitError::Persist(e) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "PersistFailed", e.to_string())
            }
        }
    }
}

impl From<HubError> for ApiError {
    fn from(err: HubError) -> Self {
        match err {
            HubError::BoardNotFound(b) => ApiError::board_not_found(&b),
            HubError::BoardExists(b) => {
                ApiError::new(StatusCode::CONFLICT, "BoardExists", format!("board {b} already exists"))
            }
            HubError::Store(e) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "StoreFailed", e.to_string()),
        }
    }
}

impl From<TemplateError> for ApiError {
    fn from(err: TemplateError) -> Self {
        let status = match err {
            TemplateError::NotFound(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, err.code(), err.to_string())
    }
}

impl From<ReportError> for ApiError {
    fn from(err: ReportError) -> Self {
        let status = match err {
            ReportError::StorylineNotFound(_) => StatusCode::NOT_FOUND,
            ReportError::ChecklistMismatch(_) => StatusCode::CONFLICT,
        };
        ApiError::new(status, err.code(), err.to_string())
    }
}

impl From<ViewError> for ApiError {
    fn from(err: ViewError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, err.code(), err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": { "code": self.code, "message": self.message } });
        if let Some(seq) = self.seq {
            body["seq"] = json!(seq);
        }
        let mut response = (self.status, Json(body)).into_response();
        if let Some(seq) = self.seq {
            response.headers_mut().insert(SEQ_HEADER, HeaderValue::from(seq));
        }
        response
    }
}
