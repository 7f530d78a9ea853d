use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use viramkit::backends::stub::StubServer;
use viramkit::backends::{
    BackendError, ChatModel, Embedder, EndpointConfig, HttpBackend, LanguageTag, PairScorer, TextRestorer, Translator,
};

struct Capture(Mutex<Vec<String>>);

impl log::Log for Capture {
    fn enabled(&self, _: &log::Metadata) -> bool {
        true
    }
    fn log(&self, record: &log::Record) {
        self.0.lock().unwrap().push(format!("{} {} {}", record.level(), record.target(), record.args()));
    }
    fn flush(&self) {}
}

fn captured() -> &'static Capture {
    static LOGGER: OnceLock<&'static Capture> = OnceLock::new();
    LOGGER.get_or_init(|| {
        let c: &'static Capture = Box::leak(Box::new(Capture(Mutex::new(Vec::new()))));
        log::set_logger(c).unwrap();
        log::set_max_level(log::LevelFilter::Trace);
        c
    })
}

fn texts(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("sentence number {i}")).collect()
}

fn endpoint(url: String, batch: usize, parallel: usize) -> EndpointConfig {
    EndpointConfig { batch_size: batch, max_parallel: parallel, ..EndpointConfig::new(url) }
}

fn tags() -> (LanguageTag, LanguageTag) {
    (LanguageTag::english(), LanguageTag::marathi())
}

#[test]
fn order_and_length_preserved_across_batching() {
    captured();
    let stub = StubServer::builder()
        .translate(|s| format!("<{s}>"))
        .delay(Duration::from_millis(2))
        .start()
        .unwrap();
    let (en, mr) = tags();
    let input = texts(37);
    for batch in [1, 7, 16] {
        for parallel in [1, 4] {
            let b = HttpBackend::new(endpoint(stub.url(), batch, parallel)).unwrap();
            let out = b.translate_batch(&input, &en, &mr).unwrap();
            assert_eq!(out.len(), input.len(), "batch {batch} parallel {parallel}");
            for (i, o) in out.iter().enumerate() {
                assert_eq!(o, &format!("<{}>", input[i]), "batch {batch} parallel {parallel}");
            }
        }
    }
    let sizes = stub.batch_sizes("/translate");
    assert!(sizes.iter().all(|&n| n <= 16));
    assert_eq!(sizes.iter().sum::<usize>(), 37 * 6);
}

#[test]
fn every_route_keeps_order() {
    let stub = StubServer::builder()
        .restore(|s| format!("{s}."))
        .embed(|s| vec![s.len() as f64, 1.0])
        .score(|_, h, _| h.len() as f64)
        .start()
        .unwrap();
    let input = texts(23);
    for (batch, parallel) in [(1, 1), (7, 4), (16, 4)] {
        let b = HttpBackend::new(endpoint(stub.url(), batch, parallel)).unwrap();
        let restored = b.restore_via_backend(&input).unwrap();
        assert_eq!(restored, input.iter().map(|s| format!("{s}.")).collect::<Vec<_>>());
        let vecs = b.embed(&input).unwrap();
        assert_eq!(vecs.iter().map(|v| v[0] as usize).collect::<Vec<_>>(), input.iter().map(String::len).collect::<Vec<_>>());
        let scores = b.score_pairs(&input, &input, &input).unwrap();
        assert_eq!(scores.iter().map(|&x| x as usize).collect::<Vec<_>>(), input.iter().map(String::len).collect::<Vec<_>>());
    }
    let b = HttpBackend::new(EndpointConfig::new(stub.url())).unwrap();
    assert_eq!(b.chat_complete("hello").unwrap(), "hello");
    b.health().unwrap();
}

#[test]
fn parallelism_is_bounded() {
    let stub = StubServer::builder().delay(Duration::from_millis(30)).start().unwrap();
    let (en, mr) = tags();
    let b = HttpBackend::new(endpoint(stub.url(), 1, 4)).unwrap();
    b.translate_batch(&texts(16), &en, &mr).unwrap();
    assert!(stub.max_in_flight() <= 4, "{}", stub.max_in_flight());
    assert!(stub.max_in_flight() >= 2, "{}", stub.max_in_flight());
}

#[test]
fn retries_are_bounded_by_max_retries() {
    captured();
    let stub = StubServer::builder().delay(Duration::from_millis(400)).start().unwrap();
    let (en, mr) = tags();
    for max_retries in [0u32, 2] {
        let before = stub.requests("/translate");
        let cfg = EndpointConfig {
            timeout_secs: 0.1,
            max_retries,
            retry_backoff_secs: 0.01,
            ..endpoint(stub.url(), 16, 1)
        };
        let err = HttpBackend::new(cfg).unwrap().translate_batch(&texts(2), &en, &mr).unwrap_err();
        match err {
            BackendError::Unavailable { attempts, .. } => assert_eq!(attempts, 1 + max_retries),
            other => panic!("{other:?}"),
        }
        // let the stalled handlers record their requests
        let deadline = Instant::now() + Duration::from_secs(3);
        while stub.requests("/translate") < before + 1 + max_retries as usize && Instant::now() < deadline {
            std::thread::sleep(Duration::from_millis(20));
        }
        std::thread::sleep(Duration::from_millis(100));
        assert_eq!(stub.requests("/translate"), before + 1 + max_retries as usize);
    }
}

#[test]
fn transient_stall_recovers_on_retry() {
    let stub = StubServer::builder().stall_first(1, Duration::from_millis(500)).start().unwrap();
    let (en, mr) = tags();
    let cfg = EndpointConfig { timeout_secs: 0.2, max_retries: 2, retry_backoff_secs: 0.01, ..endpoint(stub.url(), 16, 1) };
    let out = HttpBackend::new(cfg).unwrap().translate_batch(&texts(3), &en, &mr).unwrap();
    assert_eq!(out, texts(3));
}

#[test]
fn http_errors_are_not_retried() {
    let stub = StubServer::builder().fail_with(503, "model not loaded").start().unwrap();
    let (en, mr) = tags();
    let err = HttpBackend::new(endpoint(stub.url(), 16, 1)).unwrap().translate_batch(&texts(1), &en, &mr).unwrap_err();
    match err {
        BackendError::Http { status, message } => {
            assert_eq!(status, 503);
            assert_eq!(message, "model not loaded");
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(stub.requests("/translate"), 1);
}

#[test]
fn unreachable_server_is_unavailable() {
    let url = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        format!("http://{}", l.local_addr().unwrap())
    };
    let cfg = EndpointConfig { max_retries: 1, retry_backoff_secs: 0.01, ..EndpointConfig::new(url) };
    let err = HttpBackend::new(cfg).unwrap().health().unwrap_err();
    assert!(matches!(err, BackendError::Unavailable { attempts: 2, .. }), "{err:?}");
}

#[test]
fn auth_token_is_sent_but_never_logged() {
    let logs = captured();
    const TOKEN: &str = "tok-3f9c1a7e-secret";
    std::env::set_var("VIRAMKIT_TEST_TOKEN", TOKEN);
    let stub = StubServer::builder().require_token(TOKEN).stall_first(1, Duration::from_millis(400)).start().unwrap();
    let cfg = EndpointConfig {
        auth_token_env: Some("VIRAMKIT_TEST_TOKEN".into()),
        timeout_secs: 0.15,
        max_retries: 1,
        retry_backoff_secs: 0.01,
        ..endpoint(stub.url(), 16, 1)
    };
    let b = HttpBackend::new(cfg.clone()).unwrap();
    let (en, mr) = tags();
    assert_eq!(b.translate_batch(&texts(2), &en, &mr).unwrap(), texts(2));
    assert!(stub.auth_headers().iter().any(|h| h.as_deref() == Some(&format!("Bearer {TOKEN}")[..])));

    let wrong = StubServer::builder().require_token("other").start().unwrap();
    let err = HttpBackend::new(EndpointConfig { base_url: wrong.url(), ..cfg.clone() }).unwrap().health();
    let err = err.err().map(|e| e.to_string()).unwrap_or_default();
    let err2 = HttpBackend::new(EndpointConfig { base_url: wrong.url(), ..cfg.clone() })
        .unwrap()
        .translate_batch(&texts(1), &en, &mr)
        .unwrap_err();
    assert!(matches!(err2, BackendError::Http { status: 401, .. }));

    let lines = logs.0.lock().unwrap();
    assert!(lines.iter().any(|l| l.contains("attempt")), "expected client logs");
    for l in lines.iter().chain([&err, &err2.to_string(), &format!("{err2:?}"), &format!("{cfg:?}")]) {
        assert!(!l.contains(TOKEN), "token leaked: {l}");
    }
}

#[test]
fn missing_token_variable_is_a_config_error() {
    let cfg = EndpointConfig { auth_token_env: Some("VIRAMKIT_TEST_TOKEN_UNSET".into()), ..EndpointConfig::new("http://127.0.0.1:9") };
    let err = HttpBackend::new(cfg).unwrap().health().unwrap_err();
    assert!(matches!(err, BackendError::Config(_)));
}

#[test]
fn preconditions_checked_before_sending() {
    let stub = StubServer::start_default().unwrap();
    let b = HttpBackend::new(EndpointConfig::new(stub.url())).unwrap();
    let (en, mr) = tags();
    assert!(matches!(b.translate_batch(&[], &en, &mr), Err(BackendError::Precondition(_))));
    assert!(matches!(b.restore_via_backend(&["".into()]), Err(BackendError::Precondition(_))));
    assert!(matches!(b.score_pairs(&texts(2), &texts(1), &texts(2)), Err(BackendError::Precondition(_))));
    assert_eq!(stub.total_requests(), 0);
}

#[test]
fn short_batch_is_a_protocol_error() {
    let stub = StubServer::builder().embed(|_| Vec::new()).start().unwrap();
    let b = HttpBackend::new(EndpointConfig::new(stub.url())).unwrap();
    let err = b.embed(&texts(2)).unwrap_err();
    assert!(err.is_protocol(), "{err:?}");
}

#[test]
fn bad_endpoint_config_rejected() {
    assert!(matches!(HttpBackend::new(EndpointConfig::new("localhost:8000")), Err(BackendError::Config(_))));
    let toml_err = toml::from_str::<EndpointConfig>("base_url = \"http://x\"\nbogus = 1");
    assert!(toml_err.is_err());
}
