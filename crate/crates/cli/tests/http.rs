use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use weighwright_cli::server::{router, AppState};

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn create(app: &axum::Router, body: Value) -> String {
    let (status, v) = call(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn session_lifecycle() {
    let app = router(AppState::new(None));
    let id = create(&app, json!({ "n": 11 })).await;

    let (status, next) = call(&app, "GET", &format!("/sessions/{id}/next"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(next["weighing_index"], 1);
    assert!(next["left"]["coins"].is_array());
    assert!(next["right"]["refs"].is_number());

    let mut last = Value::Null;
    for _ in 0..8 {
        let (status, v) = call(&app, "POST", &format!("/sessions/{id}/outcome"), Some(json!({ "outcome": "=" }))).await;
        if status == StatusCode::CONFLICT {
            break;
        }
        assert_eq!(status, StatusCode::OK, "{v}");
        last = v;
    }
    assert_eq!(last["state"]["status"], "finished");
    let (_, next) = call(&app, "GET", &format!("/sessions/{id}/next"), None).await;
    assert_eq!(next["done"], true);
    assert_eq!(next["result"], "all coins uniform");

    let (status, full) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(!full["state"]["history"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn contradiction_is_409_and_keeps_state() {
    let app = router(AppState::new(None));
    let id = create(&app, json!({ "n": 11 })).await;
    let post = |symbol: &'static str| {
        let app = app.clone();
        let uri = format!("/sessions/{id}/outcome");
        async move { call(&app, "POST", &uri, Some(json!({ "outcome": symbol }))).await.0 }
    };
    for symbol in ["=", "<", "<", "<", "<", ">"] {
        assert_eq!(post(symbol).await, StatusCode::OK);
    }
    let (_, before) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(post("<").await, StatusCode::CONFLICT);
    let (_, after) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(before, after);
    assert_eq!(post(">").await, StatusCode::OK);
}

#[tokio::test]
async fn bad_requests() {
    let app = router(AppState::new(None));
    let (status, _) = call(&app, "GET", "/sessions/999/next", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({ "tree": "nope" }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let id = create(&app, json!({ "tree": "alg1" })).await;
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/outcome"), Some(json!({ "outcome": "?" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn replay_from_log() {
    let dir = std::env::temp_dir().join(format!("ww-http-log-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();

    let app = router(AppState::new(Some(dir.clone())));
    let id = create(&app, json!({ "tree": "alg1", "semantics": "sort" })).await;
    for symbol in [">", ">"] {
        let (status, _) = call(&app, "POST", &format!("/sessions/{id}/outcome"), Some(json!({ "outcome": symbol }))).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (_, before) = call(&app, "GET", &format!("/sessions/{id}"), None).await;

    let state = AppState::new(Some(dir.clone()));
    assert_eq!(state.restore().unwrap(), 1);
    let app = router(state);
    let (_, after) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(before, after);
    // New ids do not collide with restored ones.
    let fresh = create(&app, json!({ "n": 3 })).await;
    assert_ne!(fresh, id);
}
