//! HTTP session service.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use weighwright::session::Session;
use weighwright::strategies::builtin;
use weighwright::{Error, Semantics, StrategyTable};

use crate::source;

/// What a session was started from: a number of coins or a named strategy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Origin {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
    #[serde(default = "default_semantics")]
    pub semantics: Semantics,
}

fn default_semantics() -> Semantics {
    Semantics::Sort
}

impl Origin {
    pub fn from_args(n: Option<u32>, tree: Option<String>, semantics: Semantics) -> Origin {
        Origin { n, tree, semantics }
    }

    pub fn build(&self) -> weighwright::Result<Session> {
        match (&self.tree, self.n) {
            (Some(which), _) => {
                let tree = if source::is_builtin(which) {
                    builtin::repaired(which, self.semantics)?
                } else {
                    source::load(which)?.to_tree()?
                };
                let name = source::load(which).map(|t: StrategyTable| t.name).unwrap_or_else(|_| which.clone());
                Session::for_tree(tree, self.semantics, &name)
            }
            (None, Some(n)) => Session::for_coins(n, self.semantics),
            (None, None) => Err(Error::PreconditionViolated("give n or tree".into())),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
enum Event {
    Created { id: String, origin: Origin },
    Outcome { outcome: String },
}

/// Append-only JSON-lines record of one session.
#[derive(Debug)]
pub struct EventLog {
    file: File,
}

impl EventLog {
    pub fn create(path: &Path, origin: &Origin) -> std::io::Result<EventLog> {
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut log = EventLog {
            file: OpenOptions::new().create(true).append(true).open(path)?,
        };
        log.write(&Event::Created {
            id,
            origin: origin.clone(),
        })?;
        Ok(log)
    }

    pub fn outcome(&mut self, symbol: &str) -> std::io::Result<()> {
        self.write(&Event::Outcome {
            outcome: symbol.to_string(),
        })
    }

    fn write(&mut self, event: &Event) -> std::io::Result<()> {
        let line = serde_json::to_string(event).map_err(std::io::Error::other)?;
        writeln!(self.file, "{line}")?;
        self.file.sync_data()
    }
}

struct Entry {
    session: Session,
    log: Option<EventLog>,
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<Entry>>>>>,
    counter: Arc<AtomicU64>,
    log_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(log_dir: Option<PathBuf>) -> AppState {
        AppState {
            log_dir,
            ..AppState::default()
        }
    }

    /// Rebuilds every session recorded under the log directory.
    pub fn restore(&self) -> std::io::Result<usize> {
        let Some(dir) = &self.log_dir else { return Ok(0) };
        std::fs::create_dir_all(dir)?;
        let mut restored = 0;
        let mut max_id = 0;
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "jsonl") {
                continue;
            }
            let Some((id, session)) = replay(&path)? else { continue };
            if let Ok(k) = id.parse::<u64>() {
                max_id = max_id.max(k);
            }
            let file = OpenOptions::new().append(true).open(&path)?;
            let entry = Entry {
                session,
                log: Some(EventLog { file }),
            };
            self.sessions
                .lock()
                .unwrap()
                .insert(id, Arc::new(tokio::sync::Mutex::new(entry)));
            restored += 1;
        }
        self.counter.fetch_max(max_id, Ordering::SeqCst);
        Ok(restored)
    }

    fn get(&self, id: &str) -> Option<Arc<tokio::sync::Mutex<Entry>>> {
        self.sessions.lock().unwrap().get(id).cloned()
    }
}

/// Replays a log; outcomes the session rejects are skipped as they were live.
fn replay(path: &Path) -> std::io::Result<Option<(String, Session)>> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let Some(first) = lines.next().transpose()? else { return Ok(None) };
    let Ok(Event::Created { id, origin }) = serde_json::from_str(&first) else {
        return Ok(None);
    };
    let Ok(mut session) = origin.build() else { return Ok(None) };
    for line in lines {
        if let Ok(Event::Outcome { outcome }) = serde_json::from_str(&line?) {
            let _ = session.submit_symbol(&outcome);
        }
    }
    Ok(Some((id, session)))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/next", get(next))
        .route("/sessions/{id}/outcome", post(outcome))
        .with_state(state)
}

pub async fn serve(host: &str, port: u16, log_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let state = AppState::new(log_dir);
    let restored = state.restore()?;
    if restored > 0 {
        eprintln!("restored {restored} sessions");
    }
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn error(status: StatusCode, message: impl ToString) -> Response {
    (status, Json(json!({ "error": message.to_string() }))).into_response()
}

fn not_found(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, format!("no session {id}"))
}

async fn create(State(state): State<AppState>, Json(origin): Json<Origin>) -> Response {
    let built = tokio::task::spawn_blocking({
        let origin = origin.clone();
        move || origin.build()
    })
    .await;
    let session = match built {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => return error(StatusCode::UNPROCESSABLE_ENTITY, e),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e),
    };
    let id = (state.counter.fetch_add(1, Ordering::SeqCst) + 1).to_string();
    let log = match &state.log_dir {
        Some(dir) => match EventLog::create(&dir.join(format!("{id}.jsonl")), &origin) {
            Ok(log) => Some(log),
            Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e),
        },
        None => None,
    };
    let body = json!({ "id": id, "state": session.state() });
    state
        .sessions
        .lock()
        .unwrap()
        .insert(id, Arc::new(tokio::sync::Mutex::new(Entry { session, log })));
    (StatusCode::CREATED, Json(body)).into_response()
}

async fn show(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(entry) = state.get(&id) else { return not_found(&id) };
    let entry = entry.lock().await;
    Json(json!({ "id": id, "state": entry.session.state() })).into_response()
}

async fn next(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(entry) = state.get(&id) else { return not_found(&id) };
    let entry = entry.lock().await;
    Json(entry.session.next()).into_response()
}

#[derive(Deserialize)]
struct OutcomeBody {
    outcome: String,
}

async fn outcome(State(state): State<AppState>, UrlPath(id): UrlPath<String>, Json(body): Json<OutcomeBody>) -> Response {
    let Some(entry) = state.get(&id) else { return not_found(&id) };
    // One writer per session; a second concurrent submission is turned away.
    let Ok(mut entry) = entry.try_lock() else {
        return error(StatusCode::CONFLICT, "another outcome for this session is being applied");
    };
    if entry.session.is_finished() {
        return error(StatusCode::CONFLICT, "session already finished");
    }
    match entry.session.submit_symbol(&body.outcome) {
        Ok(_) => {
            if let Some(log) = entry.log.as_mut() {
                if let Err(e) = log.outcome(body.outcome.trim()) {
                    return error(StatusCode::INTERNAL_SERVER_ERROR, e);
                }
            }
            Json(json!({ "id": id, "state": entry.session.state() })).into_response()
        }
        Err(e @ Error::Contradiction(_)) => error(StatusCode::CONFLICT, e),
        Err(e) => error(StatusCode::BAD_REQUEST, e),
    }
}
