mod common;

use std::process::Command;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

use eoqa::app::server::{router, ServiceState};
use eoqa::app::Engine;

use common::{fixtures, load_fixture_kg, RUNNING_EXAMPLE};

fn ready() -> Router {
    router(ServiceState::ready(Engine::new(load_fixture_kg())))
}

async fn call(app: Router, req: Request<Body>) -> (StatusCode, Value) {
    let res = app.oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn post_ask(body: impl Into<Body>) -> Request<Body> {
    Request::post("/ask")
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap()
}

fn get(path: &str) -> Request<Body> {
    Request::get(path).body(Body::empty()).unwrap()
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[tokio::test]
async fn health_reports_store_size() {
    let (status, v) = call(ready(), get("/health")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "ok");
    assert!(v["triples"].as_u64().unwrap() > 0);
    assert_eq!(v["materialized"].as_array().unwrap().len(), 3);
}

#[tokio::test]
async fn every_route_is_unavailable_while_loading() {
    let state = ServiceState::loading();
    let app = router(state.clone());
    for req in [get("/health"), get("/ontology"), post_ask(r#"{"question":"Which rivers are in Italy?"}"#)] {
        let (status, v) = call(app.clone(), req).await;
        assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
        assert_eq!(v["status"], "loading");
    }
    state.install(Engine::new(load_fixture_kg()));
    let (status, _) = call(app, get("/health")).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn ask_returns_query_answers_and_trace() {
    let (status, v) = call(ready(), post_ask(json!({ "question": RUNNING_EXAMPLE }).to_string())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["answers"]["rows"].as_array().unwrap().len(), 2);
    assert!(v["sparql"].as_str().unwrap().contains("geof:distance"));
    assert_eq!(v["trace"]["sparql"], v["sparql"]);
    assert_eq!(v["returnTypes"], json!(["Image"]));
}

#[tokio::test]
async fn ask_can_skip_execution_and_trace() {
    let body = json!({ "question": RUNNING_EXAMPLE, "execute": false, "trace": false }).to_string();
    let (status, v) = call(ready(), post_ask(body)).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["answers"].is_null());
    assert!(v["trace"].is_null());
}

#[tokio::test]
async fn bad_requests_get_400() {
    let app = ready();
    for body in [r#"{"question":""}"#, r#"{"question":"   "}"#, "not json", r#"{"q":"x"}"#, r#"{"question":7}"#] {
        let (status, v) = call(app.clone(), post_ask(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert!(v["error"].is_string());
    }
}

#[tokio::test]
async fn ontology_lists_classes_and_properties() {
    let (status, v) = call(ready(), get("/ontology")).await;
    assert_eq!(status, StatusCode::OK);
    let classes = v["classes"].as_array().unwrap();
    assert!(classes.iter().any(|c| c["iri"] == "http://example.org/eoqa/ontology#River"));
    let props = v["properties"].as_array().unwrap();
    assert!(props.iter().any(|p| p["iri"] == "http://example.org/eoqa/ontology#cloudCover"));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_identical_requests_agree() {
    let app = ready();
    let body = json!({ "question": RUNNING_EXAMPLE }).to_string();
    let handles: Vec<_> = (0..16)
        .map(|_| {
            let (app, body) = (app.clone(), body.clone());
            tokio::spawn(async move { call(app, post_ask(body)).await })
        })
        .collect();
    let mut bodies = Vec::new();
    for h in handles {
        let (status, v) = h.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        bodies.push(without_timings(v));
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test]
async fn cli_and_service_give_the_same_response() {
    let (_, served) = call(ready(), post_ask(json!({ "question": RUNNING_EXAMPLE }).to_string())).await;
    let out = Command::new(env!("CARGO_BIN_EXE_eoqa"))
        .args(["ask", "--kg", fixtures().to_str().unwrap(), "--question", RUNNING_EXAMPLE, "--trace"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let cli: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(without_timings(cli), without_timings(served));
}
