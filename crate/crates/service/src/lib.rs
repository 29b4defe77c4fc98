//! HTTP sessions over the rescheduling engine.
//!
//! A session holds one uploaded schedule and configuration. Every request
//! works on an immutable snapshot; changes build a new snapshot and bump the
//! session revision. Mutating requests may carry `expected_revision` and are
//! refused with 409 when it is stale.

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use deice_core::io::{rank_rows, sweep_rows, synthesize_reroutes, RankRow, ReportDocument, ReportInputs, SweepRow};
use deice_core::registry::{DEFAULT_SOLVER, DEFAULT_STRATEGY};
use deice_core::{
    rank_candidates, rational, sweep_penalty, sweep_snow_on, AirportCode, CancellationSet, Minutes, OptimizeReport,
    Problem, Rational, Registry, Scenario, ScenarioConfig, Schedule, Status,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

/// Longest sweep accepted in one request.
pub const MAX_SWEEP_POINTS: usize = 2000;

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound(String),
    Conflict { expected: u64, current: u64 },
    Unprocessable(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    revision: Option<u64>,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error, message, revision) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad_request", m, None),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, "not_found", m, None),
            ApiError::Conflict { expected, current } => (
                StatusCode::CONFLICT,
                "stale_revision",
                format!("expected revision {expected}, session is at {current}"),
                Some(current),
            ),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", m, None),
        };
        (status, Json(ErrorBody { error, message, revision })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// One immutable view of a session.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub revision: u64,
    pub scenario: Scenario,
    pub base: Schedule,
    pub problem: Problem,
    pub solver: String,
    pub strategy: String,
    /// Result of the last solve at this revision.
    pub report: Option<Arc<OptimizeReport>>,
}

impl Snapshot {
    fn build(revision: u64, scenario: Scenario, base: Schedule, solver: String, strategy: String) -> Self {
        let problem = scenario.problem_from(&base);
        Snapshot {
            revision,
            scenario,
            base,
            problem,
            solver,
            strategy,
            report: None,
        }
    }

    fn with_config(&self, config: ScenarioConfig) -> Self {
        let scenario = Scenario::new(config, self.scenario.legs.clone());
        Snapshot::build(
            self.revision + 1,
            scenario,
            self.base.clone(),
            self.solver.clone(),
            self.strategy.clone(),
        )
    }
}

type Session = Arc<RwLock<Arc<Snapshot>>>;

pub struct AppState {
    registry: Registry,
    sessions: RwLock<BTreeMap<u64, Session>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(registry: Registry) -> Arc<Self> {
        Arc::new(AppState {
            registry,
            sessions: RwLock::new(BTreeMap::new()),
            next_id: AtomicU64::new(1),
        })
    }

    fn session(&self, id: &str) -> Result<Session, ApiError> {
        let key: u64 = id.parse().map_err(|_| ApiError::NotFound(format!("no session `{id}`")))?;
        self.sessions
            .read()
            .expect("session map lock")
            .get(&key)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session `{id}`")))
    }

    /// Current snapshots, by session id.
    pub fn snapshots(&self) -> Vec<(u64, Arc<Snapshot>)> {
        self.sessions
            .read()
            .expect("session map lock")
            .iter()
            .map(|(id, s)| (*id, s.read().expect("session lock").clone()))
            .collect()
    }

    /// Writes each session's schedule and configuration into `dir`.
    pub fn save_snapshots(&self, dir: &std::path::Path) -> std::io::Result<usize> {
        std::fs::create_dir_all(dir)?;
        let snapshots = self.snapshots();
        for (id, snap) in &snapshots {
            let csv = deice_core::io::render_native_csv(&snap.scenario.legs);
            std::fs::write(dir.join(format!("session-{id}.csv")), csv)?;
            std::fs::write(dir.join(format!("session-{id}.cfg")), snap.scenario.config.render())?;
        }
        Ok(snapshots.len())
    }
}

fn current(session: &Session) -> Arc<Snapshot> {
    session.read().expect("session lock").clone()
}

/// Swaps in the snapshot produced by `change` unless `expected` is stale.
fn update(
    session: &Session,
    expected: Option<u64>,
    change: impl FnOnce(&Snapshot) -> Result<Snapshot, ApiError>,
) -> Result<Arc<Snapshot>, ApiError> {
    let mut guard = session.write().expect("session lock");
    if let Some(expected) = expected {
        if expected != guard.revision {
            return Err(ApiError::Conflict {
                expected,
                current: guard.revision,
            });
        }
    }
    let next = Arc::new(change(&guard)?);
    *guard = next.clone();
    Ok(next)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Unprocessable(format!("solver task failed: {e}")))?
}

fn parse_number(text: &str, field: &str) -> Result<Rational, ApiError> {
    rational::parse(text).map_err(|e| ApiError::BadRequest(format!("{field}: {e}")))
}

/// A rational given either as a JSON number or as an exact string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    fn value(&self, field: &str) -> Result<Rational, ApiError> {
        match self {
            Number::Int(v) => Ok(Rational::from_integer(*v as i128)),
            Number::Float(v) => parse_number(&v.to_string(), field),
            Number::Text(t) => parse_number(t, field),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateScenario {
    pub schedule_csv: String,
    pub config: String,
    pub solver: Option<String>,
    pub strategy: Option<String>,
}

#[derive(Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub revision: u64,
    pub flights: usize,
    pub chains: usize,
    pub candidates: usize,
    pub solver: String,
    pub strategy: String,
}

fn info(id: u64, snap: &Snapshot) -> SessionInfo {
    SessionInfo {
        session_id: id.to_string(),
        revision: snap.revision,
        flights: snap.base.len(),
        chains: snap.base.chains().len(),
        candidates: snap.problem.candidates.len(),
        solver: snap.solver.clone(),
        strategy: snap.strategy.clone(),
    }
}

async fn create_scenario(
    State(state): State<Arc<AppState>>,
    Json(body): Json<CreateScenario>,
) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let solver = body.solver.unwrap_or_else(|| DEFAULT_SOLVER.to_string());
    let strategy = body.strategy.unwrap_or_else(|| DEFAULT_STRATEGY.to_string());
    state
        .registry
        .engine(&solver, &strategy)
        .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let config = ScenarioConfig::parse(&body.config).map_err(|e| ApiError::Unprocessable(format!("config: {e}")))?;
    let snap = blocking(move || {
        let scenario = Scenario::from_csv(body.schedule_csv.as_bytes(), config)
            .map_err(|e| ApiError::Unprocessable(format!("schedule: {e}")))?;
        let base = scenario
            .base_schedule()
            .map_err(|e| ApiError::Unprocessable(format!("schedule: {e}")))?;
        Ok(Snapshot::build(0, scenario, base, solver, strategy))
    })
    .await?;
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let body = info(id, &snap);
    state
        .sessions
        .write()
        .expect("session map lock")
        .insert(id, Arc::new(RwLock::new(Arc::new(snap))));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionInfo> {
    let snap = current(&state.session(&id)?);
    Ok(Json(info(id.parse().unwrap_or_default(), &snap)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnowOn {
    pub airport: String,
    pub minute: Minutes,
    pub deice: Option<Minutes>,
    pub expected_revision: Option<u64>,
}

#[derive(Serialize, Deserialize)]
pub struct SnowState {
    pub revision: u64,
    pub snow: BTreeMap<String, Minutes>,
    pub candidates: usize,
}

fn snow_state(snap: &Snapshot) -> SnowState {
    SnowState {
        revision: snap.revision,
        snow: snap
            .scenario
            .config
            .snow
            .iter()
            .map(|s| (s.airport.to_string(), s.snow_on))
            .collect(),
        candidates: snap.problem.candidates.len(),
    }
}

async fn snow_on(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<SnowOn>,
) -> ApiResult<SnowState> {
    let session = state.session(&id)?;
    let airport: AirportCode = body
        .airport
        .parse()
        .map_err(|e| ApiError::BadRequest(format!("airport: {e}")))?;
    let snap = blocking(move || {
        update(&session, body.expected_revision, |snap| {
            let mut config = snap.scenario.config.clone();
            if !config.airports.iter().any(|a| a.code == airport) {
                return Err(ApiError::Unprocessable(format!("airport {airport} is not configured")));
            }
            config.set_snow_on(airport, body.minute);
            if let Some(d) = body.deice {
                for s in config.snow.iter_mut().filter(|s| s.airport == airport) {
                    s.deice = Some(d);
                }
            }
            config
                .validate()
                .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
            Ok(snap.with_config(config))
        })
    })
    .await?;
    Ok(Json(snow_state(&snap)))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub turnaround: Option<Minutes>,
    pub deice: Option<Minutes>,
    pub end_of_day: Option<Minutes>,
    pub p_beta: Option<Number>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub p_alpha: Option<Number>,
    pub beta_ratio: Option<Number>,
    #[serde(default)]
    pub overrides: Overrides,
    pub solver: Option<String>,
    pub strategy: Option<String>,
    pub expected_revision: Option<u64>,
}

impl SolveRequest {
    fn changes_anything(&self) -> bool {
        let o = &self.overrides;
        self.p_alpha.is_some()
            || self.beta_ratio.is_some()
            || self.solver.is_some()
            || self.strategy.is_some()
            || o.turnaround.is_some()
            || o.deice.is_some()
            || o.end_of_day.is_some()
            || o.p_beta.is_some()
    }
}

#[derive(Serialize)]
pub struct SolveResponse {
    pub revision: u64,
    pub report: ReportDocument,
}

fn run_engine(state: &AppState, snap: &Snapshot) -> Result<OptimizeReport, ApiError> {
    let engine = state
        .registry
        .engine(&snap.solver, &snap.strategy)
        .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    engine
        .run(&snap.problem)
        .map_err(|e| ApiError::Unprocessable(e.to_string()))
}

fn document(snap: &Snapshot, report: &OptimizeReport) -> Result<ReportDocument, ApiError> {
    let reroutes = synthesize_reroutes(&report.plan.chosen, &snap.problem.schedule)
        .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
    Ok(ReportDocument::build(&ReportInputs {
        report,
        schedule: &snap.problem.schedule,
        reroutes: &reroutes,
        config: Some(&snap.scenario.config),
        actuals: None,
        oracle: None,
    }))
}

async fn solve(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Option<Json<SolveRequest>>,
) -> ApiResult<SolveResponse> {
    let session = state.session(&id)?;
    let body = body.map(|Json(b)| b).unwrap_or_default();
    let response = blocking(move || {
        let snap = if body.changes_anything() {
            update(&session, body.expected_revision, |snap| {
                let mut config = snap.scenario.config.clone();
                if let Some(b) = &body.beta_ratio {
                    config.beta_ratio = b.value("beta_ratio")?;
                }
                if let Some(p) = &body.p_alpha {
                    config.p_alpha = p.value("p_alpha")?;
                    config.p_beta = config.beta_ratio * config.p_alpha;
                }
                let o = &body.overrides;
                if let Some(p) = &o.p_beta {
                    config.p_beta = p.value("p_beta")?;
                }
                config.turnaround = o.turnaround.unwrap_or(config.turnaround);
                config.deice = o.deice.unwrap_or(config.deice);
                config.end_of_day = o.end_of_day.unwrap_or(config.end_of_day);
                config
                    .validate()
                    .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
                let solver = body.solver.clone().unwrap_or_else(|| snap.solver.clone());
                let strategy = body.strategy.clone().unwrap_or_else(|| snap.strategy.clone());
                state
                    .registry
                    .engine(&solver, &strategy)
                    .map_err(|e| ApiError::BadRequest(e.to_string()))?;
                let rebuilt = if o.turnaround.is_some() || o.end_of_day.is_some() {
                    let scenario = Scenario::new(config, snap.scenario.legs.clone());
                    let base = scenario
                        .base_schedule()
                        .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
                    Snapshot::build(snap.revision + 1, scenario, base, solver, strategy)
                } else {
                    let mut next = snap.with_config(config);
                    next.solver = solver;
                    next.strategy = strategy;
                    next
                };
                Ok(rebuilt)
            })?
        } else {
            let snap = current(&session);
            if let Some(expected) = body.expected_revision {
                if expected != snap.revision {
                    return Err(ApiError::Conflict {
                        expected,
                        current: snap.revision,
                    });
                }
            }
            snap
        };
        let report = match &snap.report {
            Some(r) => r.clone(),
            None => {
                let report = Arc::new(run_engine(&state, &snap)?);
                let mut guard = session.write().expect("session lock");
                if guard.revision == snap.revision {
                    let mut cached = (**guard).clone();
                    cached.report = Some(report.clone());
                    *guard = Arc::new(cached);
                }
                report
            }
        };
        Ok(SolveResponse {
            revision: snap.revision,
            report: document(&snap, &report)?,
        })
    })
    .await?;
    Ok(Json(response))
}

#[derive(Serialize)]
pub struct RankResponse {
    pub revision: u64,
    pub entries: Vec<RankRow>,
}

async fn rank(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<RankResponse> {
    let snap = current(&state.session(&id)?);
    let response = blocking(move || {
        let report = match &snap.report {
            Some(r) => r.clone(),
            None => Arc::new(run_engine(&state, &snap)?),
        };
        let ranks = rank_candidates(&report.plan, snap.scenario.config.beta_ratio);
        Ok(RankResponse {
            revision: snap.revision,
            entries: rank_rows(&ranks, &snap.problem.schedule),
        })
    })
    .await?;
    Ok(Json(response))
}

#[derive(Deserialize)]
pub struct SweepQuery {
    pub param: String,
    pub from: String,
    pub to: String,
    pub step: Option<String>,
}

#[derive(Serialize)]
pub struct SweepResponse {
    pub revision: u64,
    pub param: String,
    pub points: Vec<SweepRow>,
}

async fn sweep(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<SweepQuery>,
) -> ApiResult<SweepResponse> {
    let snap = current(&state.session(&id)?);
    let from = parse_number(&q.from, "from")?;
    let to = parse_number(&q.to, "to")?;
    let step = parse_number(q.step.as_deref().unwrap_or("1"), "step")?;
    if step <= Rational::from_integer(0) || to < from {
        return Err(ApiError::BadRequest("need from <= to and a positive step".into()));
    }
    let count = ((to - from) / step).floor().to_integer() + 1;
    if count > MAX_SWEEP_POINTS as i128 {
        return Err(ApiError::BadRequest(format!("at most {MAX_SWEEP_POINTS} sweep points")));
    }
    let values: Vec<Rational> = (0..count).map(|k| from + step * Rational::from_integer(k)).collect();
    let param = q.param.clone();
    let response = blocking(move || {
        let engine = state
            .registry
            .engine(&snap.solver, &snap.strategy)
            .map_err(|e| ApiError::BadRequest(e.to_string()))?;
        let points = match param.as_str() {
            "snow_on" => {
                if values.iter().any(|v| !v.is_integer()) {
                    return Err(ApiError::BadRequest("snow_on sweeps take whole minutes".into()));
                }
                let times: Vec<Minutes> = values.iter().map(|v| v.to_integer() as Minutes).collect();
                sweep_snow_on(&snap.scenario, &times, &engine)
            }
            "p_alpha" => sweep_penalty(&snap.problem, &values, snap.scenario.config.beta_ratio, &engine),
            other => {
                return Err(ApiError::BadRequest(format!(
                    "unknown sweep parameter `{other}` (expected snow_on or p_alpha)"
                )))
            }
        }
        .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
        Ok(SweepResponse {
            revision: snap.revision,
            points: sweep_rows(&points, &snap.base),
            param,
        })
    })
    .await?;
    Ok(Json(response))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIf {
    #[serde(default)]
    pub force_cancel: Vec<usize>,
    #[serde(default)]
    pub force_keep: Vec<usize>,
}

#[derive(Serialize)]
pub struct WhatIfResponse {
    pub revision: u64,
    /// Flights actually cancelled: the requested ones that are candidates.
    pub cancelled: Vec<usize>,
    /// Requested flights dropped because they cannot be cancelled.
    pub ignored: Vec<usize>,
    pub kept: Vec<usize>,
    pub departures: Vec<Minutes>,
    pub delays: Vec<Minutes>,
    pub delay_minutes: Minutes,
    #[serde(with = "rational::serde_str")]
    pub delay_objective: Rational,
    #[serde(with = "rational::serde_str")]
    pub penalty_total: Rational,
    #[serde(with = "rational::serde_str")]
    pub objective: Rational,
    pub status: Status,
}

async fn whatif(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<WhatIf>,
) -> ApiResult<WhatIfResponse> {
    let snap = current(&state.session(&id)?);
    if let Some(both) = body.force_cancel.iter().find(|f| body.force_keep.contains(f)) {
        return Err(ApiError::BadRequest(format!(
            "flight {both} is in both force_cancel and force_keep"
        )));
    }
    let n = snap.problem.schedule.len();
    if let Some(bad) = body.force_cancel.iter().chain(&body.force_keep).find(|&&f| f >= n) {
        return Err(ApiError::BadRequest(format!("flight index {bad} out of range (0..{n})")));
    }
    let response = blocking(move || {
        let solver = state
            .registry
            .solver(&snap.solver)
            .map_err(|e| ApiError::BadRequest(e.to_string()))?;
        let candidates = &snap.problem.candidates;
        let (cancel, ignored): (Vec<usize>, Vec<usize>) =
            body.force_cancel.iter().partition(|&&f| candidates.contains(f));
        let gamma = CancellationSet::new(cancel, candidates).expect("filtered to candidates");
        let result = snap.problem.solve(solver.as_ref(), &gamma);
        let mut kept = body.force_keep.clone();
        kept.sort_unstable();
        kept.dedup();
        let mut ignored = ignored;
        ignored.sort_unstable();
        ignored.dedup();
        Ok(WhatIfResponse {
            revision: snap.revision,
            cancelled: gamma.to_vec(),
            ignored,
            kept,
            delay_minutes: result.delay_minutes(),
            departures: result.departures,
            delays: result.delays,
            delay_objective: result.delay_objective,
            penalty_total: result.penalty_total,
            objective: result.objective,
            status: result.status,
        })
    })
    .await?;
    Ok(Json(response))
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/scenario", post(create_scenario))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/snow-on", post(snow_on))
        .route("/sessions/{id}/solve", post(solve))
        .route("/sessions/{id}/rank", get(rank))
        .route("/sessions/{id}/sweep", get(sweep))
        .route("/sessions/{id}/whatif", post(whatif))
        .with_state(state)
}
