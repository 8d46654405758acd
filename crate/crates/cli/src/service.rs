//! HTTP estimation service.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use quantforge::cost::{Arch, Catalog};
use quantforge::frontend::{emit_native, parse_network};
use quantforge::ir::Network;
use quantforge::passes::{parse_pass_list, PassLogEntry};
use quantforge::report::canonical_text;

use crate::app::{self, AppError, ArchChoice, FoldingSpec};

/// One uploaded network and the results of the pass pipelines run on it.
#[derive(Debug, Clone)]
pub struct Session {
    pub base: Network,
    /// Transformed networks keyed by the hash of their pass list.
    pub snapshots: HashMap<String, (Vec<String>, Network)>,
    /// Key of the snapshot later requests operate on.
    pub current: String,
}

pub fn pipeline_key(passes: &[String]) -> String {
    let mut h = Sha256::new();
    for p in passes {
        h.update(p.as_bytes());
        h.update([0]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl Session {
    pub fn new(base: Network) -> Self {
        let key = pipeline_key(&[]);
        let snapshots = HashMap::from([(key.clone(), (Vec::new(), base.clone()))]);
        Self { base, snapshots, current: key }
    }

    pub fn network(&self) -> &Network {
        &self.snapshots[&self.current].1
    }
}

#[derive(Clone)]
pub struct AppState {
    pub catalog: Arc<Catalog>,
    pub sessions: Arc<RwLock<HashMap<String, Session>>>,
    /// Directory mirroring the session store, if any.
    pub store: Option<PathBuf>,
}

impl AppState {
    pub fn new(catalog: Catalog) -> Self {
        Self { catalog: Arc::new(catalog), sessions: Arc::default(), store: None }
    }

    /// State backed by `dir`: existing sessions are reloaded and every change
    /// is written through.
    pub fn with_store(catalog: Catalog, dir: &Path) -> Result<Self, AppError> {
        std::fs::create_dir_all(dir).map_err(|e| AppError::Io(format!("{}: {e}", dir.display())))?;
        let mut sessions = HashMap::new();
        let entries = std::fs::read_dir(dir).map_err(|e| AppError::Io(e.to_string()))?;
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("net") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else { continue };
            let text = std::fs::read_to_string(&path).map_err(|e| AppError::Io(e.to_string()))?;
            let mut session = Session::new(parse_network(&text, Some("net"))?);
            let sidecar = dir.join(format!("{id}.passes.json"));
            if let Ok(log) = std::fs::read_to_string(&sidecar) {
                let passes: Vec<String> = serde_json::from_str(&log).map_err(|e| AppError::Io(e.to_string()))?;
                let (net, _) = app::apply_passes(&session.base, &passes)?;
                let key = pipeline_key(&passes);
                session.snapshots.insert(key.clone(), (passes, net));
                session.current = key;
            }
            sessions.insert(id, session);
        }
        Ok(Self {
            catalog: Arc::new(catalog),
            sessions: Arc::new(RwLock::new(sessions)),
            store: Some(dir.to_path_buf()),
        })
    }

    fn persist(&self, id: &str, session: &Session) -> Result<(), AppError> {
        let Some(dir) = &self.store else { return Ok(()) };
        let io = |e: std::io::Error| AppError::Io(e.to_string());
        std::fs::write(dir.join(format!("{id}.net")), emit_native(&session.base)?).map_err(io)?;
        let passes = &session.snapshots[&session.current].0;
        let sidecar = serde_json::to_string(passes).expect("strings serialize");
        std::fs::write(dir.join(format!("{id}.passes.json")), sidecar).map_err(io)
    }

    fn network(&self, id: &str) -> Result<Network, AppError> {
        let sessions = self.sessions.read().expect("session lock");
        sessions
            .get(id)
            .map(|s| s.network().clone())
            .ok_or_else(|| AppError::UnknownSession(id.to_string()))
    }
}

/// Structured body plus status.
pub struct Reply(StatusCode, Value);

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        (self.0, [(header::CONTENT_TYPE, "application/json")], canonical_text(&self.1)).into_response()
    }
}

impl From<AppError> for Reply {
    fn from(e: AppError) -> Self {
        let status = match e {
            AppError::Usage(_) => StatusCode::BAD_REQUEST,
            AppError::UnknownSession(_) => StatusCode::NOT_FOUND,
            AppError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Reply(status, e.payload())
    }
}

type Handled = Result<Reply, Reply>;

fn ok(v: Value) -> Handled {
    Ok(Reply(StatusCode::OK, v))
}

fn body_json(body: &Bytes) -> Result<Value, AppError> {
    serde_json::from_slice(body).map_err(|e| AppError::Usage(format!("malformed JSON body: {e}")))
}

fn field<'a>(body: &'a Value, key: &str) -> Result<&'a Value, AppError> {
    body.get(key).ok_or_else(|| AppError::Usage(format!("missing field `{key}`")))
}

fn text_field<'a>(body: &'a Value, key: &str) -> Result<&'a str, AppError> {
    field(body, key)?.as_str().ok_or_else(|| AppError::Usage(format!("field `{key}` must be a string")))
}

fn opt_text<'a>(body: &'a Value, key: &str) -> Result<Option<&'a str>, AppError> {
    match body.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(AppError::Usage(format!("field `{key}` must be a string"))),
    }
}

fn string_list(v: &Value, key: &str) -> Result<Vec<String>, AppError> {
    match v {
        Value::String(s) => Ok(parse_pass_list(s)),
        Value::Array(items) => items
            .iter()
            .map(|i| i.as_str().map(str::to_string).ok_or_else(|| AppError::Usage(format!("`{key}` entries must be strings"))))
            .collect(),
        _ => Err(AppError::Usage(format!("`{key}` must be a list or a comma separated string"))),
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f).await.expect("worker panicked")
}

async fn health() -> Handled {
    ok(json!({ "status": "ok" }))
}

async fn platforms(State(st): State<AppState>) -> Handled {
    ok(app::platforms_report(&st.catalog))
}

#[derive(serde::Deserialize)]
struct UploadQuery {
    format: Option<String>,
}

/// Body is the topology text itself; `?format=cfg` selects darknet.
async fn upload(State(st): State<AppState>, Query(q): Query<UploadQuery>, body: Bytes) -> Handled {
    let text = std::str::from_utf8(&body).map_err(|_| AppError::Usage("topology must be UTF-8 text".into()))?;
    let net = parse_network(text, q.format.as_deref()).map_err(AppError::from)?;
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session::new(net);
    st.persist(&id, &session)?;
    let reply = json!({ "session": id, "network": session.base.name, "layers": session.base.layers.len() });
    st.sessions.write().expect("session lock").insert(id, session);
    ok(reply)
}

async fn report(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> Handled {
    let net = st.network(&id)?;
    ok(app::workload_report(&net)?)
}

/// Runs a pass list on the uploaded network and makes the result current.
async fn passes(State(st): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> Handled {
    let body = body_json(&body)?;
    let list = string_list(field(&body, "passes")?, "passes")?;
    let base = {
        let sessions = st.sessions.read().expect("session lock");
        sessions.get(&id).map(|s| s.base.clone()).ok_or_else(|| AppError::UnknownSession(id.clone()))?
    };
    let (net, log): (Network, Vec<PassLogEntry>) = app::apply_passes(&base, &list)?;
    let key = pipeline_key(&list);
    let reply = app::pass_log(&net, &log);
    let mut sessions = st.sessions.write().expect("session lock");
    let session = sessions.get_mut(&id).ok_or_else(|| AppError::UnknownSession(id.clone()))?;
    session.snapshots.entry(key.clone()).or_insert((list, net));
    session.current = key.clone();
    st.persist(&id, session)?;
    let mut reply = reply;
    reply["snapshot"] = Value::String(key);
    ok(reply)
}

struct Common {
    net: Network,
    platform: quantforge::cost::PlatformSpec,
    coeffs: quantforge::cost::CostCoefficients,
}

fn common(st: &AppState, body: &Value) -> Result<Common, AppError> {
    let net = st.network(text_field(body, "session")?)?;
    let platform = app::resolve_platform(&st.catalog, text_field(body, "platform")?)?;
    let coeffs = app::resolve_coeffs(opt_text(body, "coeffs")?)?;
    Ok(Common { net, platform, coeffs })
}

async fn balance(State(st): State<AppState>, body: Bytes) -> Handled {
    let body = body_json(&body)?;
    let c = common(&st, &body)?;
    let arch: ArchChoice = opt_text(&body, "arch")?.map_or(Ok(ArchChoice::Auto), str::parse)?;
    ok(blocking(move || app::balance(&c.net, &c.platform, &c.coeffs, arch)).await?)
}

async fn estimate(State(st): State<AppState>, body: Bytes) -> Handled {
    let body = body_json(&body)?;
    let c = common(&st, &body)?;
    let arch: Arch = match opt_text(&body, "arch")? {
        Some(a) => a.parse().map_err(|_| AppError::Usage(format!("unknown architecture `{a}`")))?,
        None => Arch::Df,
    };
    let folding = FoldingSpec::from_value(body.get("folding").unwrap_or(&Value::Null))?;
    ok(app::estimate(&c.net, &c.platform, &c.coeffs, arch, &folding)?)
}

async fn schedule(State(st): State<AppState>, body: Bytes) -> Handled {
    let body = body_json(&body)?;
    let c = common(&st, &body)?;
    let engine = app::folding_from_value(field(&body, "engine")?)?;
    ok(app::schedule(&c.net, &c.platform, engine)?)
}

fn pairs(body: &Value) -> Result<Vec<(quantforge::ir::Precision, quantforge::ir::Precision)>, AppError> {
    string_list(field(body, "precisions")?, "precisions")?.iter().map(|p| app::parse_pair(p)).collect()
}

async fn roofline(State(st): State<AppState>, body: Bytes) -> Handled {
    let body = body_json(&body)?;
    let platform = app::resolve_platform(&st.catalog, text_field(&body, "platform")?)?;
    let coeffs = app::resolve_coeffs(opt_text(&body, "coeffs")?)?;
    let intensities = match field(&body, "intensities")? {
        Value::Array(items) => items.iter().map(|i| app::real(i, "intensities")).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(AppError::Usage("`intensities` must be a list".into()).into()),
    };
    ok(app::roofline_report(&platform, &coeffs, &pairs(&body)?, &intensities))
}

async fn sweep(State(st): State<AppState>, body: Bytes) -> Handled {
    let body = body_json(&body)?;
    let net = st.network(text_field(&body, "session")?)?;
    let platforms = string_list(field(&body, "platforms")?, "platforms")?
        .iter()
        .map(|p| app::resolve_platform(&st.catalog, p))
        .collect::<Result<Vec<_>, _>>()?;
    let archs = match body.get("archs") {
        None | Some(Value::Null) => vec![Arch::Df],
        Some(v) => string_list(v, "archs")?
            .iter()
            .map(|a| a.parse::<Arch>().map_err(|_| AppError::Usage(format!("unknown architecture `{a}`"))))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let coeffs = app::resolve_coeffs(opt_text(&body, "coeffs")?)?;
    let pairs = pairs(&body)?;
    ok(blocking(move || app::sweep_report(&net, &platforms, &coeffs, &pairs, &archs)).await)
}

async fn not_found() -> Reply {
    Reply(StatusCode::NOT_FOUND, json!({ "error": "NotFound", "message": "no such endpoint" }))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/platforms", get(platforms))
        .route("/networks", post(upload))
        .route("/networks/{id}/report", get(report))
        .route("/networks/{id}/passes", post(passes))
        .route("/estimate", post(estimate))
        .route("/balance", post(balance))
        .route("/schedule", post(schedule))
        .route("/roofline", post(roofline))
        .route("/sweep", post(sweep))
        .fallback(not_found)
        .with_state(state)
}

pub async fn serve(addr: &str, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
