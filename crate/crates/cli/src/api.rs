//! JSON API over a session directory, plus the hooks that feed it from a
//! running session.

use std::path::{Path, PathBuf};
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Notify;
use tower_http::services::ServeDir;

use fecraft_core::engine::{read_iterations, EventKind, HumanDecision, IterationRecord, SessionEvent, SessionHooks};

/// An event with its position in the session's event log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApiEvent {
    pub seq: usize,
    #[serde(flatten)]
    pub event: SessionEvent,
}

struct Pending {
    record: IterationRecord,
    reply: SyncSender<HumanDecision>,
}

/// Shared between the HTTP handlers and the session loop.
pub struct ApiState {
    dir: PathBuf,
    live: bool,
    events: Mutex<Vec<SessionEvent>>,
    notify: Notify,
    pending: Mutex<Option<Pending>>,
    answer: Mutex<Option<Receiver<HumanDecision>>>,
    description: Mutex<Option<String>>,
    /// Upper bound for one long-poll wait.
    pub poll_timeout: Duration,
}

impl ApiState {
    /// State for a session that is about to run in this process.
    pub fn live(dir: &Path) -> Arc<ApiState> {
        Arc::new(Self::new(dir, true, vec![]))
    }

    /// Read-only state over a finished or abandoned session directory.
    pub fn from_dir(dir: &Path) -> std::io::Result<Arc<ApiState>> {
        if !dir.join("config.json").exists() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{} is not a session directory", dir.display()),
            ));
        }
        let records = read_iterations(dir).map_err(|e| std::io::Error::other(e.to_string()))?;
        let finished = std::fs::read_to_string(dir.join("report.json"))
            .ok()
            .and_then(|t| serde_json::from_str::<Value>(&t).ok())
            .and_then(|v| v["finished"].as_bool())
            .unwrap_or(false);
        let n = records.len();
        let mut events: Vec<SessionEvent> = records
            .into_iter()
            .map(|r| SessionEvent { kind: EventKind::IterationFinished, iteration: r.index, record: Some(r) })
            .collect();
        if finished {
            events.push(SessionEvent { kind: EventKind::SessionFinished, iteration: n, record: None });
        }
        Ok(Arc::new(Self::new(dir, false, events)))
    }

    fn new(dir: &Path, live: bool, events: Vec<SessionEvent>) -> ApiState {
        ApiState {
            dir: dir.to_path_buf(),
            live,
            events: Mutex::new(events),
            notify: Notify::new(),
            pending: Mutex::new(None),
            answer: Mutex::new(None),
            description: Mutex::new(None),
            poll_timeout: Duration::from_secs(25),
        }
    }

    fn push(&self, event: SessionEvent) {
        self.events.lock().unwrap().push(event);
        self.notify.notify_waiters();
    }

    fn events_after(&self, after: usize) -> Vec<ApiEvent> {
        let ev = self.events.lock().unwrap();
        ev.iter().enumerate().skip(after).map(|(seq, e)| ApiEvent { seq: seq + 1, event: e.clone() }).collect()
    }

    fn open_decision(&self, record: &IterationRecord) {
        let (tx, rx) = sync_channel(1);
        *self.answer.lock().unwrap() = Some(rx);
        *self.pending.lock().unwrap() = Some(Pending { record: record.clone(), reply: tx });
    }

    fn pending_record(&self) -> Option<IterationRecord> {
        self.pending.lock().unwrap().as_ref().map(|p| p.record.clone())
    }
}

impl SessionHooks for ApiState {
    fn on_event(&self, event: &SessionEvent) {
        // Open the decision slot before clients can see the event.
        if let (EventKind::DecisionRequired, Some(record)) = (event.kind, &event.record) {
            self.open_decision(record);
        }
        self.push(event.clone());
    }

    fn decide(&self, record: &IterationRecord) -> Option<HumanDecision> {
        if self.answer.lock().unwrap().is_none() {
            self.open_decision(record);
        }
        let rx = self.answer.lock().unwrap().take()?;
        let d = rx.recv().ok();
        *self.pending.lock().unwrap() = None;
        d
    }

    fn description_override(&self) -> Option<String> {
        self.description.lock().unwrap().clone()
    }

    fn supports_review(&self) -> bool {
        self.live
    }
}

type Shared = Arc<ApiState>;

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn read_json(path: &Path) -> Option<Value> {
    serde_json::from_str(&std::fs::read_to_string(path).ok()?).ok()
}

fn internal(e: impl std::fmt::Display) -> Response {
    error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
}

async fn get_session(State(s): State<Shared>) -> Response {
    let Some(config) = read_json(&s.dir.join("config.json")) else {
        return error(StatusCode::NOT_FOUND, "session has not started");
    };
    Json(json!({
        "config": config,
        "baseline": read_json(&s.dir.join("baseline.json")),
        "report": read_json(&s.dir.join("report.json")),
        "pending_iteration": s.pending_record().map(|r| r.index),
        "description_override": s.description_override(),
    }))
    .into_response()
}

#[allow(clippy::result_large_err)]
fn all_iterations(s: &ApiState) -> Result<Vec<IterationRecord>, Response> {
    let mut recs = read_iterations(&s.dir).map_err(internal)?;
    if let Some(p) = s.pending_record() {
        if recs.iter().all(|r| r.index != p.index) {
            recs.push(p);
        }
    }
    Ok(recs)
}

async fn get_iterations(State(s): State<Shared>) -> Response {
    match all_iterations(&s) {
        Ok(r) => Json(r).into_response(),
        Err(e) => e,
    }
}

async fn get_iteration(State(s): State<Shared>, UrlPath(i): UrlPath<usize>) -> Response {
    match all_iterations(&s) {
        Ok(r) => match r.into_iter().find(|r| r.index == i) {
            Some(r) => Json(r).into_response(),
            None => error(StatusCode::NOT_FOUND, format!("no iteration {i}")),
        },
        Err(e) => e,
    }
}

#[derive(Deserialize)]
struct EventsQuery {
    #[serde(default)]
    after: usize,
    /// Override of the long-poll wait in milliseconds.
    timeout_ms: Option<u64>,
}

async fn get_events(State(s): State<Shared>, Query(q): Query<EventsQuery>) -> Response {
    let wait = q.timeout_ms.map(Duration::from_millis).unwrap_or(s.poll_timeout).min(s.poll_timeout);
    let notified = s.notify.notified();
    tokio::pin!(notified);
    notified.as_mut().enable();
    let mut batch = s.events_after(q.after);
    if batch.is_empty() {
        let _ = tokio::time::timeout(wait, notified).await;
        batch = s.events_after(q.after);
    }
    let next = batch.last().map_or(q.after, |e| e.seq);
    Json(json!({ "events": batch, "next": next })).into_response()
}

async fn post_decision(State(s): State<Shared>, UrlPath(i): UrlPath<usize>, Json(d): Json<HumanDecision>) -> Response {
    let mut pending = s.pending.lock().unwrap();
    match pending.as_ref() {
        Some(p) if p.record.index == i => {
            let p = pending.take().expect("checked above");
            if p.reply.send(d).is_err() {
                return error(StatusCode::CONFLICT, "the session is no longer waiting");
            }
            Json(json!({ "iteration": i, "status": "delivered" })).into_response()
        }
        Some(p) => error(StatusCode::CONFLICT, format!("iteration {} is awaiting a decision, not {i}", p.record.index)),
        None => error(StatusCode::CONFLICT, format!("iteration {i} is not awaiting a decision")),
    }
}

#[derive(Deserialize)]
struct DescriptionBody {
    text: String,
}

async fn post_description(State(s): State<Shared>, Json(b): Json<DescriptionBody>) -> Response {
    if !s.live {
        return error(StatusCode::CONFLICT, "the session is not running");
    }
    *s.description.lock().unwrap() = Some(b.text);
    Json(json!({ "status": "applies from the next iteration" })).into_response()
}

pub fn router(state: Shared, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/session", get(get_session))
        .route("/api/iterations", get(get_iterations))
        .route("/api/iterations/{i}", get(get_iteration))
        .route("/api/iterations/{i}/decision", post(post_decision))
        .route("/api/events", get(get_events))
        .route("/api/description", post(post_description))
        .with_state(state);
    match static_dir {
        Some(d) => api.fallback_service(ServeDir::new(d)),
        None => api,
    }
}

/// Binds `addr` and serves until `shutdown` resolves. Returns the bound address
/// through `bound` before serving.
pub async fn serve(
    state: Shared,
    addr: String,
    static_dir: Option<PathBuf>,
    bound: impl FnOnce(std::net::SocketAddr),
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    bound(listener.local_addr()?);
    let app = router(state, static_dir.as_deref());
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}
