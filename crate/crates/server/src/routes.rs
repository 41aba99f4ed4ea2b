use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use divclust::algorithm::AlgorithmConfig;
use divclust::io::{parse_matrix, render_dendrogram_svg, Delimiter, LoadOptions, SvgOptions};
use divclust::tree::{LinkageRow, NodeId};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::session::{EditRecord, Session};
use crate::snapshot;
use crate::state::{valid_name, AppState};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UploadParams {
    /// Dataset id; a random one is assigned when absent.
    pub name: Option<String>,
    pub header: bool,
    pub label_column: Option<usize>,
    pub delimiter: Delimiter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub dataset_id: String,
    pub rows: usize,
    pub cols: usize,
    pub labelled: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub dataset: String,
    #[serde(default)]
    pub config: AlgorithmConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRequest {
    pub point: f64,
    pub expected_revision: u64,
}

#[derive(Debug, Deserialize)]
struct DendrogramParams {
    format: Option<String>,
}

pub fn router(state: AppState) -> Router {
    let limit = state.config().max_upload_bytes;
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/datasets", get(list_datasets).post(upload_dataset))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_summary).delete(delete_session))
        .route("/sessions/{id}/tree", get(get_tree))
        .route("/sessions/{id}/edits", get(get_edits))
        .route("/sessions/{id}/nodes/{nid}/view", get(get_view))
        .route("/sessions/{id}/nodes/{nid}/split", post(set_split))
        .route("/sessions/{id}/reset", post(reset))
        .route("/sessions/{id}/dendrogram", get(dendrogram))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

fn json_rejection(r: JsonRejection) -> ApiError {
    ApiError::bad_request(r.body_text())
}

fn parse_node(raw: &str) -> Result<NodeId, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::not_found("node_not_found", format!("'{raw}' is not a node id")))
}

/// Runs `f` on the locked session off the async runtime.
async fn with_session<T, F>(state: &AppState, id: &str, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&mut Session) -> Result<T, ApiError> + Send + 'static,
{
    let cell = state.session(id)?;
    let mut guard = cell.lock_owned().await;
    tokio::task::spawn_blocking(move || f(&mut guard))
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

/// Like [`with_session`], then persists the session when a snapshot directory
/// is configured. A failed write is only logged.
async fn mutate_session<T, F>(state: &AppState, id: &str, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&mut Session) -> Result<T, ApiError> + Send + 'static,
{
    let dir = state.config().snapshot_dir.clone();
    with_session(state, id, move |s| {
        let out = f(s)?;
        if let Some(dir) = dir {
            if let Err(e) = snapshot::save_session(&dir, &s.snapshot()) {
                tracing::warn!("snapshot of session {} failed: {e}", s.id());
            }
        }
        Ok(out)
    })
    .await
}

async fn list_datasets(State(state): State<AppState>) -> Json<Vec<DatasetInfo>> {
    let infos = state
        .dataset_ids()
        .into_iter()
        .filter_map(|id| {
            let d = state.cached_dataset(&id)?;
            Some(DatasetInfo {
                rows: d.rows(),
                cols: d.cols(),
                labelled: d.labels().is_some(),
                dataset_id: id,
            })
        })
        .collect();
    Json(infos)
}

async fn upload_dataset(
    State(state): State<AppState>,
    params: Result<Query<UploadParams>, QueryRejection>,
    body: Result<Bytes, BytesRejection>,
) -> Result<(StatusCode, Json<DatasetInfo>), ApiError> {
    let Query(params) = params.map_err(|r| ApiError::bad_request(r.body_text()))?;
    let body = body.map_err(|r| {
        let status = r.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE {
            "payload_too_large"
        } else {
            "bad_request"
        };
        ApiError::new(status, code, r.body_text())
    })?;
    let id = match params.name {
        Some(name) if !valid_name(&name) => {
            return Err(ApiError::bad_request(format!("invalid dataset name '{name}'")));
        }
        Some(name) if state.has_dataset(&name) => {
            return Err(ApiError::new(StatusCode::CONFLICT, "dataset_exists", format!("dataset '{name}' exists")));
        }
        Some(name) => name,
        None => uuid::Uuid::new_v4().to_string(),
    };
    let opts = LoadOptions {
        delimiter: params.delimiter,
        header: params.header,
        label_column: params.label_column,
        label_file: None,
    };
    let snapshot_dir = state.config().snapshot_dir.clone();
    let ds_id = id.clone();
    let data = tokio::task::spawn_blocking(move || -> Result<_, ApiError> {
        let text = std::str::from_utf8(&body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
        let data = parse_matrix(text, &opts)?;
        if let Some(dir) = snapshot_dir {
            snapshot::save_dataset(&dir, &ds_id, &data)?;
        }
        Ok(data)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    let info = DatasetInfo {
        dataset_id: id.clone(),
        rows: data.rows(),
        cols: data.cols(),
        labelled: data.labels().is_some(),
    };
    state.insert_dataset(id, Arc::new(data));
    Ok((StatusCode::CREATED, Json(info)))
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body.map_err(json_rejection)?;
    let data = state.dataset(&req.dataset)?;
    let snapshot_dir = state.config().snapshot_dir.clone();
    let session = tokio::task::spawn_blocking(move || -> Result<Session, ApiError> {
        let s = Session::create(uuid::Uuid::new_v4().to_string(), req.dataset, data, req.config)?;
        if let Some(dir) = snapshot_dir {
            if let Err(e) = snapshot::save_session(&dir, &s.snapshot()) {
                tracing::warn!("snapshot of session {} failed: {e}", s.id());
            }
        }
        Ok(s)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    let summary = session.summary();
    state.insert_session(session);
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn get_summary(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let s = with_session(&state, &id, |s| Ok(s.summary())).await?;
    Ok(Json(s).into_response())
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    state
        .remove_session(&id)
        .ok_or_else(|| ApiError::not_found("session_not_found", format!("unknown session '{id}'")))?;
    if let Some(dir) = &state.config().snapshot_dir {
        snapshot::delete_session(dir, &id);
    }
    Ok(StatusCode::NO_CONTENT)
}

async fn get_tree(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let t = with_session(&state, &id, |s| s.tree_response()).await?;
    Ok(Json(t).into_response())
}

async fn get_edits(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Vec<EditRecord>>, ApiError> {
    Ok(Json(with_session(&state, &id, |s| Ok(s.edits().to_vec())).await?))
}

async fn get_view(State(state): State<AppState>, Path((id, nid)): Path<(String, String)>) -> Result<Response, ApiError> {
    let node = parse_node(&nid)?;
    let v = with_session(&state, &id, move |s| s.view(node)).await?;
    Ok(Json(v).into_response())
}

async fn set_split(
    State(state): State<AppState>,
    Path((id, nid)): Path<(String, String)>,
    body: Result<Json<SplitRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body.map_err(json_rejection)?;
    state.session(&id)?;
    let node = parse_node(&nid)?;
    let r = mutate_session(&state, &id, move |s| s.set_split(node, req.point, req.expected_revision)).await?;
    Ok(Json(r).into_response())
}

async fn reset(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let t = mutate_session(&state, &id, |s| s.reset()).await?;
    Ok(Json(t).into_response())
}

async fn dendrogram(
    State(state): State<AppState>,
    Path(id): Path<String>,
    params: Result<Query<DendrogramParams>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params.map_err(|r| ApiError::bad_request(r.body_text()))?;
    let d = with_session(&state, &id, |s| Ok(s.dendrogram())).await?;
    match params.format.as_deref() {
        None | Some("json") => Ok(Json(d).into_response()),
        Some("svg") => {
            let linkage: Vec<LinkageRow> = d
                .linkage
                .iter()
                .map(|r| LinkageRow {
                    a: r[0] as usize,
                    b: r[1] as usize,
                    height: r[2],
                    size: r[3] as usize,
                })
                .collect();
            if linkage.is_empty() {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "no_dendrogram",
                    "a single-sample tree has no dendrogram",
                ));
            }
            let svg = render_dendrogram_svg(&linkage, d.classes.as_deref(), &SvgOptions::default())?;
            Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
        }
        Some(other) => Err(ApiError::bad_request(format!("unknown format '{other}'"))),
    }
}
