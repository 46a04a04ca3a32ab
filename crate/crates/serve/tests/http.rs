use std::sync::Arc;

use aztext::classify::{MlpParams, ModelKind};
use aztext::evaluate::split;
use aztext::synthetic::separable_fixture;
use aztext::train::{train_model, ModelSpec, TrainOptions};
use aztext::{Corpus, TrainedModel};
use aztext_serve::{run, serve_on, ModelInfo, PredictResponse, ServeConfig, ServeError, DEFAULT_BODY_LIMIT};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

struct Server {
    base: String,
    stop: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<Result<(), ServeError>>,
}

impl Server {
    async fn start(model: TrainedModel, limit: usize) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let (tx, rx) = oneshot::channel();
        let task = tokio::spawn(serve_on(listener, Arc::new(model), limit, async {
            let _ = rx.await;
        }));
        Server { base, stop: Some(tx), task }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    async fn stop(mut self) {
        self.stop.take().unwrap().send(()).unwrap();
        self.task.await.unwrap().unwrap();
    }
}

fn fixture_model(kind: ModelKind) -> (TrainedModel, Corpus) {
    let corpus = separable_fixture(9);
    let (train, _) = split(&corpus, 0.1, 9, true).unwrap();
    let spec = match kind {
        ModelKind::Mlp => ModelSpec::Mlp(MlpParams { hidden: vec![8], max_iters: 40, ..MlpParams::default() }),
        other => ModelSpec::defaults(other, 9),
    };
    (train_model(&train, &TrainOptions::new(spec)).unwrap(), train)
}

async fn post(client: &reqwest::Client, url: &str, body: impl Into<reqwest::Body>) -> reqwest::Response {
    client.post(url).header("content-type", "application/json; charset=utf-8").body(body).send().await.unwrap()
}

#[tokio::test]
async fn health_and_model_info() {
    let (model, _) = fixture_model(ModelKind::Nb);
    let expected = ModelInfo::of(&model);
    let server = Server::start(model, DEFAULT_BODY_LIMIT).await;
    let client = reqwest::Client::new();

    let health = client.get(server.url("/v1/health")).send().await.unwrap();
    assert_eq!(health.status(), 200);
    assert_eq!(health.headers()["content-type"], "application/json; charset=utf-8");
    assert_eq!(health.text().await.unwrap(), r#"{"status":"ok"}"#);

    let info: ModelInfo = client.get(server.url("/v1/model")).send().await.unwrap().json().await.unwrap();
    assert_eq!(info, expected);
    assert_eq!(info.model_kind, "nb");
    assert_eq!(info.classes.len(), 6);

    assert_eq!(client.get(server.url("/v1/predict")).send().await.unwrap().status(), 405);
    assert_eq!(client.get(server.url("/nope")).send().await.unwrap().status(), 404);
    server.stop().await;
}

#[tokio::test]
async fn responses_match_in_process_predictions() {
    for kind in [ModelKind::Nb, ModelKind::Svm, ModelKind::Mlp] {
        let (model, train) = fixture_model(kind);
        let server = Server::start(model.clone(), DEFAULT_BODY_LIMIT).await;
        let client = reqwest::Client::new();
        for doc in train.iter().step_by(7).take(50) {
            let body = serde_json::json!({ "text": doc.body }).to_string();
            let resp = post(&client, &server.url("/v1/predict"), body).await;
            assert_eq!(resp.status(), 200);
            assert_eq!(resp.headers()["content-type"], "application/json; charset=utf-8");
            let got: PredictResponse = resp.json().await.unwrap();
            let local = model.predict_text(&doc.body).unwrap();
            assert_eq!(got.category, local.label);
            assert_eq!(got.category, doc.category);
            assert_eq!(got.model_kind, kind.as_str());
            for (name, score) in model.class_names.iter().zip(&local.scores) {
                assert!((got.scores[name] - score).abs() <= 1e-12, "{name}: {} vs {score}", got.scores[name]);
            }
        }
        server.stop().await;
    }
}

#[tokio::test]
async fn error_statuses() {
    let (model, _) = fixture_model(ModelKind::Nb);
    let server = Server::start(model, 1024).await;
    let client = reqwest::Client::new();
    let url = server.url("/v1/predict");

    for (body, status) in [
        (r#"{"text": "#.to_string(), 400),
        (r#"{"body": "salam"}"#.to_string(), 400),
        (r#"["salam"]"#.to_string(), 400),
        (r#"{"text": ""}"#.to_string(), 422),
        (r#"{"text": "  \n "}"#.to_string(), 422),
        (format!(r#"{{"text": "{}"}}"#, "a".repeat(4096)), 413),
    ] {
        let resp = post(&client, &url, body.clone()).await;
        assert_eq!(resp.status(), status, "{}", &body[..body.len().min(40)]);
        assert_eq!(resp.headers()["content-type"], "application/json; charset=utf-8");
        let err: serde_json::Value = resp.json().await.unwrap();
        assert!(err["error"].is_string());
    }
    server.stop().await;
}

#[tokio::test]
async fn concurrent_identical_requests_agree() {
    let (model, train) = fixture_model(ModelKind::Svm);
    let server = Server::start(model, DEFAULT_BODY_LIMIT).await;
    let client = reqwest::Client::new();
    let body = serde_json::json!({ "text": train.documents()[3].body }).to_string();
    let url = server.url("/v1/predict");
    let tasks: Vec<_> = (0..32)
        .map(|_| {
            let (client, url, body) = (client.clone(), url.clone(), body.clone());
            tokio::spawn(async move { post(&client, &url, body).await.text().await.unwrap() })
        })
        .collect();
    let mut bodies = Vec::new();
    for t in tasks {
        bodies.push(t.await.unwrap());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
    server.stop().await;
}

#[tokio::test]
async fn startup_fails_on_bad_model_and_never_writes_it() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.aztx");
    std::fs::write(&bad, b"NOPE\x01\x00\x00\x00").unwrap();
    let err = run(&bad, &ServeConfig { port: 0, ..ServeConfig::default() }).await.unwrap_err();
    assert!(matches!(err, ServeError::Model(_)), "{err}");
    assert_eq!(std::fs::read(&bad).unwrap(), b"NOPE\x01\x00\x00\x00");

    let (model, _) = fixture_model(ModelKind::Nb);
    let good = dir.path().join("good.aztx");
    aztext::save_model(&model, &good).unwrap();
    let before = std::fs::read(&good).unwrap();
    let loaded = aztext::load_model(&good).unwrap();
    let server = Server::start(loaded, DEFAULT_BODY_LIMIT).await;
    let client = reqwest::Client::new();
    post(&client, &server.url("/v1/predict"), r#"{"text":"salam"}"#).await;
    server.stop().await;
    assert_eq!(std::fs::read(&good).unwrap(), before);
}
