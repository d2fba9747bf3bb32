//! The assessment HTTP API over a fresh campaign directory.
//!
//! Without arguments the example drives the API in-process and exits. With
//! `--serve PORT` it keeps listening so a browser UI can connect.

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use tower::ServiceExt;

use irbench::corpus::Corpus;
use irbench::pipeline::{build_pools, PipelineSettings, Retrieval};
use irbench::service::{router, serve, Campaign};
use irbench::synthetic::{generate, SyntheticOptions};

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<serde_json::Value>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8_lossy(&bytes).into_owned())
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = generate(SyntheticOptions::default());
    let corpus = Corpus::from_records(c.records)?;
    let settings = PipelineSettings::default();
    let runs = Retrieval::build(&corpus)?.retrieve_all(&c.queries, &settings)?;
    let pools = build_pools(&runs, settings.depth, settings.seed)?;
    let dir = tempfile::tempdir()?;
    Campaign::create_dir(dir.path(), &c.topics, &corpus, &pools)?;
    let campaign = Arc::new(Campaign::open(dir.path())?);

    let mut args = std::env::args().skip(1);
    if args.next().as_deref() == Some("--serve") {
        let port: u16 = args.next().map(|p| p.parse()).transpose()?.unwrap_or(8080);
        println!("campaign in {}; listening on 127.0.0.1:{port}", dir.path().display());
        serve(campaign, ([127, 0, 0, 1], port).into(), None).await?;
        return Ok(());
    }

    let app = router(campaign, None);
    let (_, topics) = call(&app, "GET", "/topics", None).await;
    println!("GET /topics -> {}...", &topics[..topics.len().min(120)]);

    let (status, created) = call(&app, "POST", "/sessions", Some(serde_json::json!({"assessor_id": "demo", "topic_id": 166}))).await;
    println!("POST /sessions -> {status} {created}");
    let id = serde_json::from_str::<serde_json::Value>(&created)?["session_id"].as_str().unwrap_or_default().to_string();

    let (_, docs) = call(&app, "GET", &format!("/sessions/{id}/documents"), None).await;
    let docs: serde_json::Value = serde_json::from_str(&docs)?;
    let cards = docs["documents"].as_array().cloned().unwrap_or_default();
    println!("{} documents to judge", cards.len());
    for (i, card) in cards.iter().enumerate() {
        let body = serde_json::json!({"doc_id": card["doc_id"], "relevant": i % 3 != 0});
        let (status, ack) = call(&app, "POST", &format!("/sessions/{id}/judgments"), Some(body)).await;
        if i + 1 == cards.len() {
            println!("last judgment -> {status} {ack}");
        }
    }

    let (status, _) = call(&app, "POST", "/sessions", Some(serde_json::json!({"assessor_id": "demo", "topic_id": 166}))).await;
    println!("second session for the same topic -> {status}");
    let (_, export) = call(&app, "GET", "/export/judgments", None).await;
    println!("export: {} lines", export.lines().count());
    Ok(())
}
