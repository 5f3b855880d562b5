//! HTTP front end for the planner.
//!
//! `POST /plan` takes `{"text": ...}` or `{"request": ...}` and returns one
//! verified itinerary (or a reason) for each objective mode, `POST /select`
//! records the option a user picked and `GET /health` reports whether the
//! inventory has loaded.

mod load;
mod plan;
mod session;

pub use load::load_inventory;
pub use plan::{
    diagnose_infeasible, plan_options, OptionError, OptionStats, OptionStatus, PlanOption,
    PlanOptions, PlanResponse, PlanTimings,
};
pub use session::{SelectError, Selection, SessionEvent, SessionStore};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;
use tokio::net::TcpListener;

use itinera_core::milp::{ModelParams, ObjectiveMode};
use itinera_core::model::{request_from_value, Inventory, SymbolicRequest};
use itinera_core::nl::{translator_for, ParseError, TranslateError, Translator, TranslatorBackend};
use itinera_core::solver::SolverConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub port: u16,
    /// Inventory file: a dataset (`.jsonl`) or a single inventory object.
    pub dataset_path: PathBuf,
    /// JSON-lines session log; sessions stay in memory when unset.
    pub session_log: Option<PathBuf>,
    /// Solve the three modes on separate threads.
    pub parallel_modes: bool,
    pub translator: TranslatorBackend,
    pub solver: SolverConfig,
    pub model: ModelParams,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1".into(),
            port: 8080,
            dataset_path: PathBuf::new(),
            session_log: None,
            parallel_modes: false,
            translator: TranslatorBackend::default(),
            solver: SolverConfig::default(),
            model: ModelParams::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid service config: {0}")]
    Config(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("session log: {0}")]
    SessionLog(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.dataset_path.as_os_str().is_empty() {
            return Err(ServiceError::Config("dataset_path: required".into()));
        }
        self.translator
            .validate()
            .map_err(|e| ServiceError::Config(format!("translator: {e}")))?;
        self.model
            .validate()
            .map_err(|e| ServiceError::Config(format!("model.{e}")))?;
        if self.solver.time_limit_ms == 0 {
            return Err(ServiceError::Config(
                "solver.time_limit_ms: must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum LoadState {
    Loading,
    Ready(Arc<Inventory>),
    Failed(String),
}

pub struct AppState {
    config: ServiceConfig,
    translator: Box<dyn Translator>,
    inventory: RwLock<LoadState>,
    sessions: SessionStore,
}

impl AppState {
    /// Validates the config, checks that the dataset file exists and opens
    /// the session log. The inventory itself is read by [`AppState::load`].
    pub fn prepare(config: ServiceConfig) -> Result<Arc<AppState>, ServiceError> {
        config.validate()?;
        if !config.dataset_path.is_file() {
            return Err(ServiceError::Dataset(format!(
                "{}: no such file",
                config.dataset_path.display()
            )));
        }
        let sessions = match &config.session_log {
            Some(p) => SessionStore::open(p).map_err(ServiceError::SessionLog)?,
            None => SessionStore::in_memory(),
        };
        Ok(Arc::new(AppState {
            translator: translator_for(&config.translator),
            config,
            inventory: RwLock::new(LoadState::Loading),
            sessions,
        }))
    }

    /// Reads the dataset. Blocking; the outcome is visible on `/health`.
    pub fn load(&self) -> Result<(), String> {
        let outcome = load_inventory(&self.config.dataset_path);
        let mut slot = self.inventory.write().expect("inventory lock");
        match outcome {
            Ok(inv) => {
                tracing::info!(
                    flights = inv.flights.len(),
                    hotels = inv.hotels.len(),
                    "inventory loaded"
                );
                *slot = LoadState::Ready(Arc::new(inv));
                Ok(())
            }
            Err(e) => {
                tracing::error!(error = %e, "inventory failed to load");
                *slot = LoadState::Failed(e.clone());
                Err(e)
            }
        }
    }

    pub fn load_state(&self) -> LoadState {
        self.inventory.read().expect("inventory lock").clone()
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.sessions
    }
}

/// JSON error body `{"error": {kind, message, ...}}`.
struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, kind: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": { "kind": kind, "message": message.into() } }),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.body["error"][key] = value;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn translate_error(e: TranslateError) -> ApiError {
    match e {
        TranslateError::Parse(ParseError::UnparsableSegment { start, end, text }) => ApiError::new(
            StatusCode::BAD_REQUEST,
            "unparsable_request",
            format!("cannot parse `{text}`"),
        )
        .with("span", json!({ "start": start, "end": end, "text": text })),
        TranslateError::Parse(p) => {
            ApiError::new(StatusCode::BAD_REQUEST, "unparsable_request", p.to_string())
        }
        other => ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "translation_failed",
            other.to_string(),
        ),
    }
}

enum PlanInput {
    Text(String),
    Request(SymbolicRequest),
}

fn plan_input(body: &[u8]) -> Result<PlanInput, ApiError> {
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", m);
    let value: Value =
        serde_json::from_slice(body).map_err(|e| bad(format!("malformed JSON: {e}")))?;
    let Value::Object(mut obj) = value else {
        return Err(bad("body must be a JSON object".into()));
    };
    let shape = "body must be exactly one of {\"text\": string} or {\"request\": object}";
    if obj.len() != 1 {
        return Err(bad(shape.into()));
    }
    if let Some(text) = obj.remove("text") {
        return match text {
            Value::String(s) => Ok(PlanInput::Text(s)),
            _ => Err(bad("text: expected a string".into())),
        };
    }
    let Some(request) = obj.remove("request") else {
        return Err(bad(shape.into()));
    };
    request_from_value(request)
        .map(PlanInput::Request)
        .map_err(|e| {
            ApiError::new(
                StatusCode::BAD_REQUEST,
                "invalid_request",
                format!("request: {e}"),
            )
        })
}

fn ready_inventory(state: &AppState) -> Result<Arc<Inventory>, ApiError> {
    match state.load_state() {
        LoadState::Ready(inv) => Ok(inv),
        LoadState::Loading => Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "loading",
            "inventory is still loading",
        )),
        LoadState::Failed(e) => Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "inventory_unavailable",
            e,
        )),
    }
}

async fn plan_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    match plan_request(state, body).await {
        Ok(r) => Json(r).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn plan_request(state: Arc<AppState>, body: Bytes) -> Result<PlanResponse, ApiError> {
    let started = Instant::now();
    let input = plan_input(&body)?;
    let inventory = ready_inventory(&state)?;
    let worker = state.clone();
    let (request, options, translate_ms, solve_ms) = tokio::task::spawn_blocking(move || {
        let t0 = Instant::now();
        let request = match input {
            PlanInput::Request(r) => r,
            PlanInput::Text(text) => {
                worker
                    .translator
                    .translate(&text)
                    .map_err(translate_error)?
                    .request
            }
        };
        let translate_ms = t0.elapsed().as_secs_f64() * 1000.0;
        let c = &worker.config;
        let (options, solve_ms) =
            plan_options(&request, &inventory, &c.model, &c.solver, c.parallel_modes);
        Ok::<_, ApiError>((request, options, translate_ms, solve_ms))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;

    let selectable: BTreeMap<String, _> = ObjectiveMode::ALL
        .into_iter()
        .filter_map(|m| {
            let cost = options.get(m).cost.as_ref()?;
            Some((m.key().to_string(), cost.grand_total))
        })
        .collect();
    let session_id = state.sessions.create(&request, selectable).map_err(|e| {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "session_log",
            e.to_string(),
        )
    })?;
    Ok(PlanResponse {
        session_id,
        request_echo: request,
        options,
        timings: PlanTimings {
            translate_ms,
            solve_ms,
            total_ms: started.elapsed().as_secs_f64() * 1000.0,
        },
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectBody {
    session_id: String,
    option: String,
}

async fn select_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", m);
    let body: SelectBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return bad(e.to_string()).into_response(),
    };
    if let Err(e) = body.option.parse::<ObjectiveMode>() {
        return bad(format!("option: {e}")).into_response();
    }
    match state.sessions.select(&body.session_id, &body.option) {
        Ok(sel) => Json(sel).into_response(),
        Err(SelectError::UnknownSession) => ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_session",
            format!("no session `{}`", body.session_id),
        )
        .into_response(),
        Err(SelectError::NotSelectable) => ApiError::new(
            StatusCode::CONFLICT,
            "not_selectable",
            format!("option `{}` has no itinerary in this session", body.option),
        )
        .into_response(),
        Err(SelectError::Log(e)) => {
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "session_log", e).into_response()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Health {
    /// `loading`, `ok` or `failed`.
    pub status: String,
    pub flights: usize,
    pub hotels: usize,
    pub sessions: usize,
    pub error: Option<String>,
    pub version: String,
    pub translator: String,
}

async fn health_handler(State(state): State<Arc<AppState>>) -> Response {
    let translator = match &state.config.translator {
        TranslatorBackend::TemplateParser => "template_parser",
        TranslatorBackend::ExternalEndpoint(_) => "external_endpoint",
    };
    let mut h = Health {
        status: "loading".into(),
        flights: 0,
        hotels: 0,
        sessions: state.sessions.len(),
        error: None,
        version: env!("CARGO_PKG_VERSION").into(),
        translator: translator.into(),
    };
    let code = match state.load_state() {
        LoadState::Loading => StatusCode::SERVICE_UNAVAILABLE,
        LoadState::Ready(inv) => {
            h.status = "ok".into();
            h.flights = inv.flights.len();
            h.hotels = inv.hotels.len();
            StatusCode::OK
        }
        LoadState::Failed(e) => {
            h.status = "failed".into();
            h.error = Some(e);
            StatusCode::SERVICE_UNAVAILABLE
        }
    };
    (code, Json(h)).into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/plan", post(plan_handler))
        .route("/select", post(select_handler))
        .route("/health", get(health_handler))
        .with_state(state)
}

/// Serves on `listener` while the inventory loads in the background. A
/// failed load stops the server and is returned as the error.
pub async fn run(listener: TcpListener, state: Arc<AppState>) -> Result<(), ServiceError> {
    let loader = state.clone();
    let (tx, rx) = tokio::sync::oneshot::channel();
    tokio::task::spawn_blocking(move || {
        let _ = tx.send(loader.load());
    });
    let shutdown = async move {
        match rx.await {
            Ok(Err(_)) => {}
            _ => std::future::pending::<()>().await,
        }
    };
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    match state.load_state() {
        LoadState::Failed(e) => Err(ServiceError::Dataset(e)),
        _ => Ok(()),
    }
}

/// Binds the configured address and runs the service.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let addr = (config.bind.clone(), config.port);
    let state = AppState::prepare(config)?;
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    run(listener, state).await
}
