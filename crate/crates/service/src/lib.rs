//! HTTP API for interactive exploration of discovery bounds.
//!
//! Upload a study once (`POST /api/sessions`), then query bounds for any
//! selection of hypotheses, the defining and dual set families, and the dual
//! view conditioned on hypotheses known to be true nulls. Sessions are
//! immutable, so concurrent queries never interfere.
//!
//! | route | answer |
//! |---|---|
//! | `POST /api/sessions` `{labels?, pvalues, alpha?, method?}` | `{id, m, exact_available}` |
//! | `GET /api/sessions/{id}/bound?ids=h1,h2` | `{set, d, alpha}` |
//! | `GET /api/sessions/{id}/defining` | array of label arrays |
//! | `GET /api/sessions/{id}/dual` | array of label arrays |
//! | `POST /api/sessions/{id}/condition` `{known_true_nulls}` | `{survivors, implicated}` |
//!
//! Errors are `{code, message, field?}` with status 400 (validation), 404
//! (unknown session), 409 (set families need `m <= closure_cap`) or 413
//! (too many hypotheses).

mod error;
mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use discovery_bounds::study::{DEFAULT_ALPHA, DEFAULT_CLOSURE_CAP};
use discovery_bounds::{condition_on_nulls, AnalysisConfig, Error, LocalTest, PValueStudy};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

pub use error::{ApiError, ErrorBody};
pub use session::{ExactArtifacts, Session, SessionStore};

/// Default upper limit on hypotheses per session.
pub const DEFAULT_MAX_M: usize = 2_000_000;
/// Default number of sessions kept in memory.
pub const DEFAULT_SESSION_CAPACITY: usize = 64;
/// Request body limit, sized for `DEFAULT_MAX_M` labelled p-values.
pub const BODY_LIMIT_BYTES: usize = 512 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub closure_cap: usize,
    pub max_m: usize,
    pub session_capacity: usize,
    /// Write-through directory for restart persistence.
    pub study_dir: Option<PathBuf>,
    /// Directory holding the built UI bundle, served at `/`.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            closure_cap: DEFAULT_CLOSURE_CAP,
            max_m: DEFAULT_MAX_M,
            session_capacity: DEFAULT_SESSION_CAPACITY,
            study_dir: None,
            ui_dir: None,
        }
    }
}

struct AppState {
    store: SessionStore,
    max_m: usize,
}

type Shared = State<Arc<AppState>>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub pvalues: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub method: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionResponse {
    pub id: String,
    pub m: usize,
    pub exact_available: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResponse {
    pub set: Vec<String>,
    pub d: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionRequest {
    #[serde(default)]
    pub known_true_nulls: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResponse {
    pub survivors: Vec<Vec<String>>,
    pub implicated: Vec<String>,
}

/// Builds the application router.
pub fn router(config: ServiceConfig) -> Router {
    let state = Arc::new(AppState {
        store: SessionStore::new(config.session_capacity, config.study_dir, config.closure_cap),
        max_m: config.max_m,
    });
    let api = Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/bound", get(bound))
        .route("/api/sessions/{id}/defining", get(defining))
        .route("/api/sessions/{id}/dual", get(dual))
        .route("/api/sessions/{id}/condition", post(condition))
        .layer(DefaultBodyLimit::max(BODY_LIMIT_BYTES))
        .with_state(state);
    match config.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves the API on `addr` until the process ends.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(config)).await
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_json", e.to_string()))
}

fn session(state: &AppState, id: &str) -> Result<Arc<Session>, ApiError> {
    state.store.get(id).ok_or_else(|| ApiError::session_not_found(id))
}

/// Checks the request field by field so errors name the offending field.
fn validate_create(
    req: CreateSessionRequest,
    closure_cap: usize,
    max_m: usize,
) -> Result<(PValueStudy, AnalysisConfig), ApiError> {
    let pvalues = req
        .pvalues
        .ok_or_else(|| ApiError::invalid_field("pvalues", "pvalues is required"))?;
    if pvalues.is_empty() {
        return Err(ApiError::invalid_field(
            "pvalues",
            "a study needs at least one hypothesis",
        ));
    }
    if pvalues.len() > max_m {
        return Err(ApiError::too_large(pvalues.len(), max_m));
    }
    if let Some(i) = pvalues.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(ApiError::invalid_field(
            "pvalues",
            format!("p-value {} at position {} is outside [0, 1]", pvalues[i], i + 1),
        ));
    }
    let method = match req.method.as_deref() {
        None => LocalTest::Simes,
        Some(name) => name
            .parse()
            .map_err(|e: Error| ApiError::invalid_field("method", e.to_string()))?,
    };
    let alpha = req.alpha.unwrap_or(DEFAULT_ALPHA);
    let config = AnalysisConfig::with_cap(alpha, method, closure_cap)
        .map_err(|e| ApiError::invalid_field("alpha", e.to_string()))?;
    if method == LocalTest::Fisher && pvalues.len() > closure_cap {
        return Err(ApiError::invalid_field(
            "method",
            format!(
                "fisher needs the full closure, which is limited to m <= {closure_cap}; use simes for larger studies"
            ),
        ));
    }
    let study = match req.labels {
        Some(labels) => PValueStudy::new(labels, pvalues),
        None => PValueStudy::from_pvalues(pvalues),
    }
    .map_err(|e| ApiError::invalid_field("labels", e.to_string()))?;
    Ok((study, config))
}

async fn create_session(State(state): Shared, body: Bytes) -> Result<Json<CreateSessionResponse>, ApiError> {
    let req: CreateSessionRequest = parse_json(&body)?;
    let (study, config) = validate_create(req, state.store.closure_cap(), state.max_m)?;
    let id = uuid::Uuid::new_v4().to_string();
    let built = tokio::task::spawn_blocking(move || Session::build(id, study, config))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::bad_request("invalid_study", e.to_string()))?;
    let session = state.store.insert(built)?;
    Ok(Json(CreateSessionResponse {
        id: session.id.clone(),
        m: session.m(),
        exact_available: session.exact_available(),
    }))
}

fn split_labels(list: &str) -> Vec<String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

async fn bound(
    State(state): Shared,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Json<BoundResponse>, ApiError> {
    let session = session(&state, &id)?;
    let labels = query.get("ids").map(|s| split_labels(s)).unwrap_or_default();
    let set = session.set_from_labels("ids", &labels)?;
    let d = session.bound(&set)?;
    Ok(Json(BoundResponse {
        set: session.study.labels_of(&set),
        d,
        alpha: session.alpha,
    }))
}

async fn defining(State(state): Shared, Path(id): Path<String>) -> Result<Json<Vec<Vec<String>>>, ApiError> {
    let session = session(&state, &id)?;
    let exact = session.exact(state.store.closure_cap())?;
    Ok(Json(session.family_labels(&exact.defining)))
}

fn dual_family(session: &Session, cap: usize) -> Result<&discovery_bounds::SetFamily, ApiError> {
    session
        .exact(cap)?
        .dual
        .as_ref()
        .map_err(|why| ApiError::unavailable("dual_unavailable", why.clone()))
}

async fn dual(State(state): Shared, Path(id): Path<String>) -> Result<Json<Vec<Vec<String>>>, ApiError> {
    let session = session(&state, &id)?;
    let family = dual_family(&session, state.store.closure_cap())?;
    Ok(Json(session.family_labels(family)))
}

async fn condition(
    State(state): Shared,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ConditionResponse>, ApiError> {
    let session = session(&state, &id)?;
    let req: ConditionRequest = parse_json(&body)?;
    let family = dual_family(&session, state.store.closure_cap())?;
    let known = session.set_from_labels("known_true_nulls", &req.known_true_nulls)?;
    let (kept, implicated) = condition_on_nulls(family, &known).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(ConditionResponse {
        survivors: session.family_labels(&kept),
        implicated: session.study.labels_of(&implicated),
    }))
}
