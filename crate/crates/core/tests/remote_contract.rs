use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdea_core::generation::{
    Backend, DecodingParams, GenerationError, GenerationRequest, RemoteBackend, RemoteConfig,
    WireRequest, WireResponse,
};

#[derive(Default)]
struct Seen {
    bodies: Mutex<Vec<WireRequest>>,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
}

async fn generate(State(seen): State<Arc<Seen>>, Json(req): Json<WireRequest>) -> Json<WireResponse> {
    let now = seen.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    seen.peak.fetch_max(now, Ordering::SeqCst);
    seen.bodies.lock().unwrap().push(req.clone());
    tokio::time::sleep(Duration::from_millis(20)).await;
    let mut rng = match req.seed {
        Some(seed) => ChaCha8Rng::seed_from_u64(seed),
        None => ChaCha8Rng::from_os_rng(),
    };
    let text = (0..3)
        .map(|_| format!("reply {}<|endoftext|>", rng.random_range(0..1_000_000)))
        .collect();
    seen.in_flight.fetch_sub(1, Ordering::SeqCst);
    Json(WireResponse { text })
}

async fn spawn(router: Router) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router).await.unwrap() });
    addr
}

fn backend(addr: SocketAddr, configure: impl FnOnce(&mut RemoteConfig)) -> RemoteBackend {
    let mut cfg = RemoteConfig::new(format!("http://{addr}"));
    configure(&mut cfg);
    RemoteBackend::new(cfg).unwrap()
}

fn request(prompt: &str, seed: Option<u64>) -> GenerationRequest {
    let params = DecodingParams::new(0.9, 100, 1.0, seed).unwrap();
    GenerationRequest::new(prompt, params).unwrap()
}

#[tokio::test]
async fn passes_parameters_and_is_seed_deterministic() {
    let seen = Arc::new(Seen::default());
    let addr = spawn(Router::new().route("/generate", post(generate)).with_state(seen.clone())).await;
    let b = backend(addr, |_| {});

    let first = b.generate(&request("hi", Some(42))).await.unwrap();
    let second = b.generate(&request("hi", Some(42))).await.unwrap();
    let other = b.generate(&request("hi", Some(43))).await.unwrap();
    assert_eq!(first, second);
    assert_ne!(first.text(), other.text());
    assert!(first.terminated());

    let bodies = seen.bodies.lock().unwrap();
    assert_eq!(
        bodies[0],
        WireRequest {
            prompt: "hi".into(),
            max_tokens: 100,
            top_p: 0.9,
            temperature: 1.0,
            seed: Some(42)
        }
    );
}

#[tokio::test]
async fn respects_in_flight_bound() {
    let seen = Arc::new(Seen::default());
    let addr = spawn(Router::new().route("/generate", post(generate)).with_state(seen.clone())).await;
    let b = Arc::new(backend(addr, |c| c.max_in_flight = 2));
    let tasks: Vec<_> = (0..8)
        .map(|i| {
            let b = b.clone();
            tokio::spawn(async move { b.generate(&request(&format!("p{i}"), Some(i))).await })
        })
        .collect();
    for t in tasks {
        t.await.unwrap().unwrap();
    }
    assert!(seen.peak.load(Ordering::SeqCst) <= 2);
    assert_eq!(seen.bodies.lock().unwrap().len(), 8);
}

#[tokio::test]
async fn custom_endpoint_path() {
    let seen = Arc::new(Seen::default());
    let addr = spawn(Router::new().route("/v1/complete", post(generate)).with_state(seen)).await;
    let b = backend(addr, |c| c.endpoint_path = "/v1/complete".into());
    assert!(b.generate(&request("x", Some(1))).await.is_ok());
}

#[tokio::test]
async fn error_mapping() {
    let router = Router::new()
        .route("/fail", post(|| async { StatusCode::INTERNAL_SERVER_ERROR }))
        .route("/garbage", post(|| async { "not json" }))
        .route("/wrong-shape", post(|| async { Json(serde_json::json!({"txt": 1})) }))
        .route(
            "/slow",
            post(|| async {
                tokio::time::sleep(Duration::from_secs(5)).await;
                Json(WireResponse { text: "late".into() })
            }),
        );
    let addr = spawn(router).await;

    let err = backend(addr, |c| c.endpoint_path = "/fail".into())
        .generate(&request("a", None))
        .await
        .unwrap_err();
    assert!(matches!(err, GenerationError::Status { status: 500, .. }));
    assert_eq!(err.prompt(), "a");
    assert!(err.backend().starts_with("remote:http://"));

    for path in ["/garbage", "/wrong-shape"] {
        let err = backend(addr, |c| c.endpoint_path = path.into())
            .generate(&request("b", None))
            .await
            .unwrap_err();
        assert!(matches!(err, GenerationError::Malformed { .. }), "{path}: {err}");
    }

    let err = backend(addr, |c| {
        c.endpoint_path = "/slow".into();
        c.timeout = Duration::from_millis(150);
    })
    .generate(&request("c", None))
    .await
    .unwrap_err();
    assert!(matches!(err, GenerationError::Timeout { .. }), "{err}");
}

#[tokio::test]
async fn unreachable_backend() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let err = backend(addr, |_| {}).generate(&request("d", None)).await.unwrap_err();
    assert!(matches!(err, GenerationError::Unreachable { .. }), "{err}");
}
