//! HTTP play service.
//!
//! | route                         | purpose                               |
//! |-------------------------------|---------------------------------------|
//! | `POST /sessions`              | solve (cached) and open a session     |
//! | `POST /sessions/{id}/moves`   | play one simultaneous round           |
//! | `GET /sessions/{id}`          | read-only snapshot with annotations   |
//! | `GET /graphs/{spec}/solution` | value table and strategies as JSON    |
//!
//! Errors come back as `{"error": "..."}` with status 400 (bad input),
//! 404 (unknown session), 409 (state conflict) or 422 (illegal move).

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cccr::export::{solution_doc, Extended, SolutionDoc};
use cccr::{generate, parse_edge_list, GameError, Graph, PositionSpace, Side};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;
use uuid::Uuid;

use crate::session::{solve_key, PositionView, RoundOutcome, Session, SessionError, SessionView, SolveKey, Solved, Start};

/// Largest position space the service will solve on request.
pub const MAX_SERVED_POSITIONS: usize = 200_000;

pub const DEFAULT_TOL: f64 = 1e-2;

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound(String),
    Conflict(String),
    Unprocessable(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(serde_json::json!({ "error": msg }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::BadRequest(m) => ApiError::BadRequest(m),
            SessionError::Conflict(m) => ApiError::Conflict(m),
            SessionError::IllegalMove(m) => ApiError::Unprocessable(m),
        }
    }
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        ApiError::BadRequest(e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

type Shared<T> = Arc<tokio::sync::Mutex<T>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<Uuid, Shared<Session>>>>,
    cache: Arc<Mutex<HashMap<SolveKey, Arc<Solved>>>>,
}

impl AppState {
    /// The solved arena for `(g, cops, tol)`, computing it at most once
    /// per key (a racing duplicate solve is discarded).
    pub async fn solved(&self, g: Graph, cops: usize, tol: f64) -> Result<Arc<Solved>, ApiError> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(ApiError::BadRequest("tol must be positive".into()));
        }
        let size = PositionSpace::new(g.node_count(), cops)?.len();
        if size > MAX_SERVED_POSITIONS {
            return Err(ApiError::BadRequest(format!(
                "{size} positions is more than this service solves ({MAX_SERVED_POSITIONS})"
            )));
        }
        let key = solve_key(&g, cops, tol);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let solved = tokio::task::spawn_blocking(move || Solved::new(g, cops, tol))
            .await
            .map_err(|e| ApiError::Internal(e.to_string()))??;
        let mut cache = self.cache.lock().expect("cache lock");
        Ok(cache.entry(key).or_insert_with(|| Arc::new(solved)).clone())
    }

    fn session(&self, id: &str) -> Result<Shared<Session>, ApiError> {
        let not_found = || ApiError::NotFound(format!("no session '{id}'"));
        let id = Uuid::parse_str(id).map_err(|_| not_found())?;
        self.sessions
            .read()
            .expect("session lock")
            .get(&id)
            .cloned()
            .ok_or_else(not_found)
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// Generator spec such as `gavenciak` or `cycle:6`.
    pub graph: Option<String>,
    /// Edge-list text, instead of `graph`.
    pub edge_list: Option<String>,
    #[serde(default = "one")]
    pub cops: usize,
    pub human_side: Side,
    #[serde(default)]
    pub start: Start,
    pub seed: Option<u64>,
    #[serde(default)]
    pub force: bool,
    pub tol: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Created {
    pub session_id: Uuid,
    pub human_side: Side,
    pub cops: usize,
    pub position: PositionView,
    pub round: u32,
    pub captured: bool,
    pub value_at_position: Extended,
    pub legal_moves: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MoveLabels {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitMove {
    #[serde(rename = "move")]
    pub mv: MoveLabels,
    /// Round this move is meant for; a stale round is a conflict.
    pub round: Option<u32>,
}

#[derive(Debug, Deserialize)]
pub struct SolutionQuery {
    #[serde(default = "one")]
    pub cops: usize,
    pub tol: Option<f64>,
}

fn arena(graph: Option<&str>, edge_list: Option<&str>) -> Result<Graph, ApiError> {
    match (graph, edge_list) {
        (Some(spec), None) => Ok(generate(spec).map_err(GameError::from)?),
        (None, Some(text)) => Ok(parse_edge_list(text).map_err(GameError::from)?),
        _ => Err(ApiError::BadRequest("give exactly one of 'graph' and 'edge_list'".into())),
    }
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let Json(req) = body?;
    let g = arena(req.graph.as_deref(), req.edge_list.as_deref())?;
    let solved = state.solved(g, req.cops, req.tol.unwrap_or(DEFAULT_TOL)).await?;
    let seed = req.seed.unwrap_or_else(rand::random);
    let session = Session::new(solved, req.human_side, &req.start, seed, req.force)?;
    let view = session.view();
    let id = session.id();
    state
        .sessions
        .write()
        .expect("session lock")
        .insert(id, Arc::new(tokio::sync::Mutex::new(session)));
    Ok((
        StatusCode::CREATED,
        Json(Created {
            session_id: id,
            human_side: view.human_side,
            cops: view.cops,
            position: view.position,
            round: view.round,
            captured: view.captured,
            value_at_position: view.value_at_position,
            legal_moves: view.legal_moves,
        }),
    ))
}

async fn submit_move(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<SubmitMove>, JsonRejection>,
) -> Result<Json<RoundOutcome>, ApiError> {
    let session = state.session(&id)?;
    let Json(req) = body?;
    let labels = match req.mv {
        MoveLabels::One(l) => vec![l],
        MoveLabels::Many(ls) => ls,
    };
    // One writer per session: a submission racing another one loses.
    let mut session = session
        .try_lock()
        .map_err(|_| ApiError::Conflict("another move for this session is being processed".into()))?;
    Ok(Json(session.submit(&labels, req.round)?))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let session = state.session(&id)?;
    let session = session.lock().await;
    Ok(Json(session.view()))
}

async fn get_solution(
    State(state): State<AppState>,
    Path(spec): Path<String>,
    query: Result<Query<SolutionQuery>, QueryRejection>,
) -> Result<Json<SolutionDoc>, ApiError> {
    let Query(q) = query?;
    let g = arena(Some(&spec), None)?;
    let solved = state.solved(g, q.cops, q.tol.unwrap_or(DEFAULT_TOL)).await?;
    Ok(Json(solution_doc(&solved.values, &solved.strategies)))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/moves", post(submit_move))
        .route("/graphs/{spec}/solution", get(get_solution))
        .with_state(state)
}

/// The router, serving files from `static_dir` for every other path.
pub fn app(static_dir: Option<PathBuf>) -> Router {
    let api = router(AppState::default());
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app(static_dir)).await
}
