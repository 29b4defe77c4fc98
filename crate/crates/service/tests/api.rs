use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use deice_core::Registry;
use deice_service::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use std::sync::Arc;
use tower::ServiceExt;

const SCHEDULE: &str = include_str!("../../../data/demo.csv");
const CONFIG: &str = include_str!("../../../data/demo.cfg");

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut request = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            request = request.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let response = app.clone().oneshot(request.body(body).unwrap()).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

async fn session() -> (Router, Arc<AppState>, String) {
    let state = AppState::new(Registry::builtin());
    let app = router(state.clone());
    let (status, body) = call(
        &app,
        "POST",
        "/scenario",
        Some(json!({"schedule_csv": SCHEDULE, "config": CONFIG})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let id = body["session_id"].as_str().unwrap().to_string();
    (app, state, id)
}

#[tokio::test]
async fn health_check() {
    let app = router(AppState::new(Registry::builtin()));
    let (status, body) = call(&app, "GET", "/healthz", None).await;
    assert_eq!((status, body), (StatusCode::OK, Value::String("ok".into())));
}

#[tokio::test]
async fn scenario_upload_errors() {
    let app = router(AppState::new(Registry::builtin()));
    let bad_config = json!({"schedule_csv": SCHEDULE, "config": "p_gamma = 3"});
    let (status, body) = call(&app, "POST", "/scenario", Some(bad_config)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["message"].as_str().unwrap().contains("p_gamma"));

    let empty = json!({"schedule_csv": "flight_number,tail,origin,dest,dep_local,arr_local\n", "config": CONFIG});
    let (status, _) = call(&app, "POST", "/scenario", Some(empty)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let request = Request::post("/scenario")
        .header("content-type", "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    assert_eq!(app.clone().oneshot(request).await.unwrap().status(), StatusCode::BAD_REQUEST);

    let unknown = json!({"schedule_csv": SCHEDULE, "config": CONFIG, "solver": "interior-point"});
    let (status, body) = call(&app, "POST", "/scenario", Some(unknown)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["message"].as_str().unwrap().contains("propagate, simplex"));

    let (status, _) = call(&app, "POST", "/sessions/99/solve", Some(json!({}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn solve_reports_plan_and_is_repeatable() {
    let (app, _, id) = session().await;
    let uri = format!("/sessions/{id}/solve");
    let (status, first) = call(&app, "POST", &uri, None).await;
    assert_eq!(status, StatusCode::OK, "{first}");
    assert_eq!(first["revision"], 0);
    let totals = &first["report"]["totals"];
    assert_eq!(totals["cancel_count"], 2);
    assert_eq!(totals["lp_count"], 10);
    assert!(totals["objective"].is_string());
    let (_, second) = call(&app, "POST", &uri, Some(json!({}))).await;
    assert_eq!(first, second);

    let (status, priced) = call(&app, "POST", &uri, Some(json!({"p_alpha": 1000}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(priced["revision"], 1);
    assert_eq!(priced["report"]["totals"]["cancel_count"], 0);

    let (status, body) = call(&app, "POST", &uri, Some(json!({"p_alpha": "5/2", "expected_revision": 0}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["revision"], 1);
}

#[tokio::test]
async fn snow_on_moves_the_candidate_set() {
    let (app, _, id) = session().await;
    let (status, body) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/snow-on"),
        Some(json!({"airport": "SEA", "minute": 0, "expected_revision": 0})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["revision"], 1);
    assert_eq!(body["snow"]["SEA"], 0);
    assert_eq!(body["snow"]["PDX"], 300);

    let (status, _) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/snow-on"),
        Some(json!({"airport": "LAX", "minute": 10})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/snow-on"),
        Some(json!({"airport": "sea", "minute": 10})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn rank_and_sweep() {
    let (app, _, id) = session().await;
    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/rank"), None).await;
    assert_eq!(status, StatusCode::OK);
    let entries = body["entries"].as_array().unwrap();
    assert_eq!(entries[0]["flight_number"], "2149");
    assert_eq!(entries[0]["max_p_alpha"], "90");

    let (status, body) = call(
        &app,
        "GET",
        &format!("/sessions/{id}/sweep?param=p_alpha&from=0&to=100&step=10"),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let points = body["points"].as_array().unwrap();
    assert_eq!(points.len(), 11);
    let counts: Vec<u64> = points.iter().map(|p| p["cancel_count"].as_u64().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*counts.last().unwrap(), 0);

    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/sweep?param=snow_on&from=0&to=600&step=300"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["points"].as_array().unwrap().len(), 3);

    let (status, _) = call(&app, "GET", &format!("/sessions/{id}/sweep?param=turnaround&from=0&to=1"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "GET", &format!("/sessions/{id}/sweep?param=p_alpha&from=0&to=100000"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn whatif_clamps_to_candidates() {
    let (app, _, id) = session().await;
    let uri = format!("/sessions/{id}/whatif");
    let (status, body) = call(&app, "POST", &uri, Some(json!({"force_cancel": [16, 0], "force_keep": [15]}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["cancelled"], json!([16]));
    assert_eq!(body["ignored"], json!([0]));
    assert_eq!(body["kept"], json!([15]));
    assert_eq!(body["status"]["status"], "feasible");
    assert_eq!(body["objective"], "306");

    let (status, _) = call(&app, "POST", &uri, Some(json!({"force_cancel": [16], "force_keep": [16]}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", &uri, Some(json!({"force_cancel": [500]}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn snapshots_are_isolated_and_saved() {
    let (app, state, id) = session().await;
    let before = state.snapshots();
    let (_, _) = call(&app, "POST", &format!("/sessions/{id}/solve"), Some(json!({"p_alpha": 10}))).await;
    assert_eq!(before[0].1.revision, 0);
    assert_eq!(before[0].1.scenario.config.p_alpha, deice_core::rational::int(60));
    assert_eq!(state.snapshots()[0].1.revision, 1);

    let dir = tempfile::tempdir().unwrap();
    assert_eq!(state.save_snapshots(dir.path()).unwrap(), 1);
    let cfg = std::fs::read_to_string(dir.path().join(format!("session-{id}.cfg"))).unwrap();
    assert!(cfg.contains("p_alpha = 10"));
    assert!(dir.path().join(format!("session-{id}.csv")).exists());
}
