//! HTTP API for interactive diagnosis sessions.
//!
//! | method | path | body |
//! |---|---|---|
//! | GET | `/kbs` | |
//! | POST | `/sessions` | `{"kb_id": "car"}` |
//! | GET | `/sessions/{id}` | |
//! | PUT | `/sessions/{id}/requirements` | `[{"id": "c5", "expression": "type = combi"}, ...]` |
//! | GET | `/sessions/{id}/diagnoses?algo=fastdiag&n=3` | |
//! | POST | `/sessions/{id}/repair` | `{"ids": ["c5", "c6"]}` |
//! | GET | `/sessions/{id}/solution` | |
//!
//! Requirement lists are ordered least important first. Every response that
//! touches the solver carries a `stats` object with the consistency-check
//! counts.

pub mod error;
pub mod journal;
pub mod registry;
pub mod session;

use std::collections::HashMap;
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use diag_core::enumeration::{Algorithm, Limit};

pub use error::ServiceError;
use journal::{Event, Journal};
use registry::{KbInfo, KbRegistry};
use session::{
    DiagnosesReport, RequirementSpec, Session, SessionView, SolutionReport, Verdict, VerdictReport,
};

type SharedSession = Arc<Mutex<Session>>;

pub struct AppState {
    registry: KbRegistry,
    sessions: RwLock<HashMap<String, SharedSession>>,
    next_id: AtomicU64,
    journal: Option<Journal>,
}

impl AppState {
    pub fn new(registry: KbRegistry) -> Self {
        AppState {
            registry,
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            journal: None,
        }
    }

    /// Logs every session change under `dir` and restores the sessions
    /// already logged there.
    pub fn with_journal(mut self, dir: &Path) -> io::Result<Self> {
        let journal = Journal::open(dir)?;
        let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
        let mut max_id = 0;
        for (id, events) in journal.read_all()? {
            let mut session: Option<Session> = None;
            for e in events {
                match (e, session.as_mut()) {
                    (Event::Created { kb_id }, None) => {
                        let kb = self.registry.get(&kb_id).ok_or_else(|| {
                            bad(format!("{id}: unknown knowledge base `{kb_id}`"))
                        })?;
                        session = Some(Session::new(id.clone(), kb_id, kb));
                    }
                    (Event::Requirements { requirements }, Some(s)) => {
                        s.set_requirements(&requirements)
                            .map_err(|e| bad(format!("{id}: {e}")))?;
                    }
                    (Event::Repair { ids }, Some(s)) => {
                        s.repair(&ids).map_err(|e| bad(format!("{id}: {e}")))?;
                    }
                    (e, _) => return Err(bad(format!("{id}: unexpected event {e:?}"))),
                }
            }
            if let Some(s) = session {
                if let Some(n) = id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
                    max_id = max_id.max(n);
                }
                self.sessions
                    .get_mut()
                    .unwrap()
                    .insert(id, Arc::new(Mutex::new(s)));
            }
        }
        self.next_id = AtomicU64::new(max_id + 1);
        self.journal = Some(journal);
        Ok(self)
    }

    pub fn session_count(&self) -> usize {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .len()
    }

    fn session(&self, id: &str) -> Result<SharedSession, ServiceError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("no session `{id}`")))
    }

    fn log(&self, session: &str, event: &Event) -> Result<(), ServiceError> {
        match &self.journal {
            Some(j) => j
                .append(session, event)
                .map_err(|e| ServiceError::Internal(format!("journal: {e}"))),
            None => Ok(()),
        }
    }
}

/// Runs `f` on the locked session off the async workers. Requests for one
/// session are serialized by its lock.
async fn with_session<T, F>(state: Arc<AppState>, id: String, f: F) -> Result<T, ServiceError>
where
    T: Send + 'static,
    F: FnOnce(&AppState, &mut Session) -> Result<T, ServiceError> + Send + 'static,
{
    let session = state.session(&id)?;
    tokio::task::spawn_blocking(move || {
        let mut s = session.lock().unwrap_or_else(|e| e.into_inner());
        f(&state, &mut s)
    })
    .await
    .map_err(|e| ServiceError::Internal(e.to_string()))?
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/kbs", get(list_kbs))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/requirements", put(set_requirements))
        .route("/sessions/{id}/diagnoses", get(get_diagnoses))
        .route("/sessions/{id}/repair", post(apply_repair))
        .route("/sessions/{id}/solution", get(get_solution))
        .with_state(state)
}

async fn list_kbs(State(state): State<Arc<AppState>>) -> Json<Vec<KbInfo>> {
    Json(state.registry.describe())
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub kb_id: String,
}

#[derive(Debug, Serialize)]
pub struct Created {
    pub session_id: String,
    pub kb_id: String,
    pub verdict: Verdict,
    pub stats: diag_core::CheckStats,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Json(body): Json<CreateSession>,
) -> Result<(StatusCode, Json<Created>), ServiceError> {
    let kb = state
        .registry
        .get(&body.kb_id)
        .ok_or_else(|| ServiceError::NotFound(format!("no knowledge base `{}`", body.kb_id)))?;
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::Relaxed));
    state.log(
        &id,
        &Event::Created {
            kb_id: body.kb_id.clone(),
        },
    )?;
    let session = Session::new(id.clone(), body.kb_id.clone(), kb);
    let created = Created {
        session_id: id.clone(),
        kb_id: body.kb_id,
        verdict: session.verdict(),
        stats: Default::default(),
    };
    state
        .sessions
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(created)))
}

async fn get_session(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SessionView>, ServiceError> {
    with_session(state, id, |_, s| Ok(s.view())).await.map(Json)
}

async fn set_requirements(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<Vec<RequirementSpec>>,
) -> Result<Json<VerdictReport>, ServiceError> {
    with_session(state, id, move |state, s| {
        let report = s.set_requirements(&body)?;
        state.log(s.id(), &Event::Requirements { requirements: body })?;
        Ok(report)
    })
    .await
    .map(Json)
}

#[derive(Debug, Deserialize)]
pub struct DiagnosesQuery {
    pub algo: Option<String>,
    pub n: Option<String>,
}

async fn get_diagnoses(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<DiagnosesQuery>,
) -> Result<Json<DiagnosesReport>, ServiceError> {
    let algorithm: Algorithm = q.algo.as_deref().unwrap_or("fastdiag").parse().map_err(
        |e: diag_core::enumeration::UnknownAlgorithm| ServiceError::BadRequest(e.to_string()),
    )?;
    let limit: Limit =
        q.n.as_deref()
            .unwrap_or("1")
            .parse()
            .map_err(ServiceError::BadRequest)?;
    with_session(state, id, move |_, s| Ok(s.diagnoses(algorithm, limit)))
        .await
        .map(Json)
}

#[derive(Debug, Deserialize)]
pub struct RepairRequest {
    pub ids: Vec<String>,
}

async fn apply_repair(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<RepairRequest>,
) -> Result<Json<SolutionReport>, ServiceError> {
    with_session(state, id, move |state, s| {
        let report = s.repair(&body.ids)?;
        state.log(s.id(), &Event::Repair { ids: body.ids })?;
        Ok(report)
    })
    .await
    .map(Json)
}

async fn get_solution(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SolutionReport>, ServiceError> {
    with_session(state, id, |_, s| Ok(s.solution()))
        .await
        .map(Json)
}
