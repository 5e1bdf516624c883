use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tokio::net::TcpListener;

use crate::study::{ResponseBody, Study};
use crate::StudyError;

pub type SharedStudy = Arc<Mutex<Study>>;

impl IntoResponse for StudyError {
    fn into_response(self) -> Response {
        let status = match &self {
            StudyError::UnknownSession(_)
            | StudyError::TrialOutOfRange { .. }
            | StudyError::UnknownImage => StatusCode::NOT_FOUND,
            StudyError::AlreadyAnswered { .. } | StudyError::OutOfOrder { .. } => StatusCode::CONFLICT,
            StudyError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            StudyError::InvalidConfig(_) | StudyError::Stats(_) | StudyError::Io(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

fn lock(study: &SharedStudy) -> MutexGuard<'_, Study> {
    study.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

#[derive(Deserialize, Default)]
struct SessionRequest {
    seed: Option<u64>,
}

async fn create_session(
    State(study): State<SharedStudy>,
    body: Bytes,
) -> Result<impl IntoResponse, StudyError> {
    let request: SessionRequest = if body.iter().all(u8::is_ascii_whitespace) {
        SessionRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| StudyError::InvalidRequest(e.to_string()))?
    };
    Ok(Json(lock(&study).create_session(request.seed)))
}

async fn trial(
    State(study): State<SharedStudy>,
    Path((sid, index)): Path<(String, usize)>,
) -> Result<impl IntoResponse, StudyError> {
    Ok(Json(lock(&study).trial(&sid, index)?))
}

async fn respond(
    State(study): State<SharedStudy>,
    Path((sid, index)): Path<(String, usize)>,
    body: Bytes,
) -> Result<impl IntoResponse, StudyError> {
    let body: ResponseBody =
        serde_json::from_slice(&body).map_err(|e| StudyError::InvalidRequest(e.to_string()))?;
    Ok(Json(lock(&study).respond(&sid, index, body)?))
}

async fn results(State(study): State<SharedStudy>) -> Result<impl IntoResponse, StudyError> {
    Ok(Json(lock(&study).results()?))
}

async fn image(
    State(study): State<SharedStudy>,
    Path(token): Path<String>,
) -> Result<impl IntoResponse, StudyError> {
    let (bytes, kind) = lock(&study).image(&token)?;
    Ok(([(header::CONTENT_TYPE, kind), (header::CACHE_CONTROL, "no-store")], bytes))
}

/// Routes of the study API.
pub fn router(study: SharedStudy) -> Router {
    Router::new()
        .route("/api/session", post(create_session))
        .route("/api/trial/{sid}/{index}", get(trial))
        .route("/api/response/{sid}/{index}", post(respond))
        .route("/api/results", get(results))
        .route("/img/{token}", get(image))
        .with_state(study)
}

/// Serves the study on `listener` until the process ends.
pub async fn serve(listener: TcpListener, study: Study) -> std::io::Result<()> {
    axum::serve(listener, router(Arc::new(Mutex::new(study)))).await
}
