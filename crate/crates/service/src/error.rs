use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ServiceError {
    NotFound(String),
    BadRequest(String),
    InvalidRequirement {
        id: String,
        message: String,
    },
    /// Ids in a repair that are no longer current requirements.
    Stale(String),
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::InvalidRequirement { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Stale(_) => StatusCode::CONFLICT,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl std::fmt::Display for ServiceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ServiceError::NotFound(m)
            | ServiceError::BadRequest(m)
            | ServiceError::Stale(m)
            | ServiceError::Internal(m) => f.write_str(m),
            ServiceError::InvalidRequirement { id, message } => {
                write!(f, "requirement `{id}`: {message}")
            }
        }
    }
}

impl std::error::Error for ServiceError {}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.to_string() });
        if let ServiceError::InvalidRequirement { id, .. } = &self {
            body["requirement"] = json!(id);
        }
        (self.status(), Json(body)).into_response()
    }
}
