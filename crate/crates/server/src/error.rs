use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

/// An error response, rendered as `{"code": ..., "message": ...}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<divclust::Error> for ApiError {
    fn from(e: divclust::Error) -> Self {
        use divclust::Error as E;
        let message = e.to_string();
        match e {
            E::Config(_) => Self::new(StatusCode::BAD_REQUEST, "invalid_config", message),
            E::Data(_) | E::Parse { .. } | E::Shape(_) => Self::new(StatusCode::BAD_REQUEST, "invalid_data", message),
            E::DegenerateSplit { .. } => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "degenerate_split", message),
            E::NoProjection(_) => Self::new(StatusCode::CONFLICT, "no_projection", message),
            _ => Self::internal(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(Body {
            code: self.code,
            message: &self.message,
        });
        (self.status, body).into_response()
    }
}
