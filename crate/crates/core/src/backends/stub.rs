//! In-process server speaking the backend protocol, for contract tests.
//!
//! Each route answers through a per-text closure. The server counts
//! requests, records batch sizes and `Authorization` headers, tracks peak
//! concurrency, and can inject delays or HTTP errors.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::wire::*;

type TextFn = Arc<dyn Fn(&str) -> String + Send + Sync>;
type EmbedFn = Arc<dyn Fn(&str) -> Vec<f64> + Send + Sync>;
type ScoreFn = Arc<dyn Fn(&str, &str, &str) -> f64 + Send + Sync>;

#[derive(Clone)]
struct Handlers {
    translate: TextFn,
    restore: TextFn,
    embed: EmbedFn,
    score: ScoreFn,
    chat: TextFn,
}

#[derive(Clone, Default)]
struct Faults {
    delay: Duration,
    stall_first: Option<(usize, Duration)>,
    fail: Option<(u16, String)>,
    required_token: Option<String>,
}

#[derive(Default)]
struct Stats {
    requests: Mutex<HashMap<String, usize>>,
    batch_sizes: Mutex<HashMap<String, Vec<usize>>>,
    auth: Mutex<Vec<Option<String>>>,
    total: AtomicUsize,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
}

pub struct StubBuilder {
    handlers: Handlers,
    faults: Faults,
}

impl Default for StubBuilder {
    fn default() -> Self {
        Self {
            handlers: Handlers {
                translate: Arc::new(|s| s.to_string()),
                restore: Arc::new(|s| s.to_string()),
                embed: Arc::new(|s| vec![s.chars().count() as f64, 1.0]),
                score: Arc::new(|_, h, r| if h == r { 1.0 } else { 0.5 }),
                chat: Arc::new(|s| s.to_string()),
            },
            faults: Faults::default(),
        }
    }
}

impl StubBuilder {
    pub fn translate(mut self, f: impl Fn(&str) -> String + Send + Sync + 'static) -> Self {
        self.handlers.translate = Arc::new(f);
        self
    }

    pub fn restore(mut self, f: impl Fn(&str) -> String + Send + Sync + 'static) -> Self {
        self.handlers.restore = Arc::new(f);
        self
    }

    pub fn embed(mut self, f: impl Fn(&str) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.handlers.embed = Arc::new(f);
        self
    }

    pub fn score(mut self, f: impl Fn(&str, &str, &str) -> f64 + Send + Sync + 'static) -> Self {
        self.handlers.score = Arc::new(f);
        self
    }

    pub fn chat(mut self, f: impl Fn(&str) -> String + Send + Sync + 'static) -> Self {
        self.handlers.chat = Arc::new(f);
        self
    }

    /// Sleep before answering every request.
    pub fn delay(mut self, d: Duration) -> Self {
        self.faults.delay = d;
        self
    }

    /// Sleep before answering only the first `n` requests.
    pub fn stall_first(mut self, n: usize, d: Duration) -> Self {
        self.faults.stall_first = Some((n, d));
        self
    }

    /// Answer every protocol route with this status and error message.
    pub fn fail_with(mut self, status: u16, message: impl Into<String>) -> Self {
        self.faults.fail = Some((status, message.into()));
        self
    }

    /// Reject requests without `Authorization: Bearer <token>` with 401.
    pub fn require_token(mut self, token: impl Into<String>) -> Self {
        self.faults.required_token = Some(token.into());
        self
    }

    pub fn start(self) -> std::io::Result<StubServer> {
        let server = tiny_http::Server::http("127.0.0.1:0").map_err(std::io::Error::other)?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("stub server has no IP address"))?;
        let server = Arc::new(server);
        let stats = Arc::new(Stats::default());
        let accept = {
            let server = Arc::clone(&server);
            let stats = Arc::clone(&stats);
            let handlers = self.handlers;
            let faults = self.faults;
            thread::spawn(move || {
                for req in server.incoming_requests() {
                    let stats = Arc::clone(&stats);
                    let handlers = handlers.clone();
                    let faults = faults.clone();
                    thread::spawn(move || serve_one(req, &handlers, &faults, &stats));
                }
            })
        };
        Ok(StubServer { addr, server, stats, accept: Some(accept) })
    }
}

/// Running stub; shuts down on drop.
pub struct StubServer {
    addr: SocketAddr,
    server: Arc<tiny_http::Server>,
    stats: Arc<Stats>,
    accept: Option<JoinHandle<()>>,
}

impl StubServer {
    pub fn builder() -> StubBuilder {
        StubBuilder::default()
    }

    pub fn start_default() -> std::io::Result<Self> {
        StubBuilder::default().start()
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Requests received on `route` (e.g. `"/translate"`), including failed ones.
    pub fn requests(&self, route: &str) -> usize {
        self.stats.requests.lock().unwrap().get(route).copied().unwrap_or(0)
    }

    pub fn total_requests(&self) -> usize {
        self.stats.total.load(Ordering::SeqCst)
    }

    /// Number of texts in each successfully parsed request on `route`.
    pub fn batch_sizes(&self, route: &str) -> Vec<usize> {
        self.stats.batch_sizes.lock().unwrap().get(route).cloned().unwrap_or_default()
    }

    pub fn auth_headers(&self) -> Vec<Option<String>> {
        self.stats.auth.lock().unwrap().clone()
    }

    pub fn max_in_flight(&self) -> usize {
        self.stats.max_in_flight.load(Ordering::SeqCst)
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

fn json_response<T: Serialize>(status: u16, body: &T) -> tiny_http::Response<std::io::Cursor<Vec<u8>>> {
    let header = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("static header");
    tiny_http::Response::from_data(serde_json::to_vec(body).expect("serializable"))
        .with_status_code(status)
        .with_header(header)
}

fn error(status: u16, message: impl Into<String>) -> (u16, serde_json::Value) {
    (status, serde_json::to_value(ErrorBody { error: message.into() }).unwrap())
}

fn parse<T: DeserializeOwned>(body: &str) -> Result<T, (u16, serde_json::Value)> {
    serde_json::from_str(body).map_err(|e| error(400, format!("bad request body: {e}")))
}

fn ok<T: Serialize>(v: T) -> Result<(u16, serde_json::Value), (u16, serde_json::Value)> {
    Ok((200, serde_json::to_value(v).unwrap()))
}

fn serve_one(mut req: tiny_http::Request, h: &Handlers, f: &Faults, stats: &Stats) {
    let now = stats.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    stats.max_in_flight.fetch_max(now, Ordering::SeqCst);
    let seq = stats.total.fetch_add(1, Ordering::SeqCst);

    let path = req.url().split('?').next().unwrap_or("").to_string();
    *stats.requests.lock().unwrap().entry(path.clone()).or_default() += 1;
    let auth = req
        .headers()
        .iter()
        .find(|hd| hd.field.equiv("Authorization"))
        .map(|hd| hd.value.as_str().to_string());
    stats.auth.lock().unwrap().push(auth.clone());

    let mut body = String::new();
    let read = req.as_reader().read_to_string(&mut body);

    let mut sleep = f.delay;
    if let Some((n, d)) = f.stall_first {
        if seq < n {
            sleep = sleep.max(d);
        }
    }
    if !sleep.is_zero() {
        thread::sleep(sleep);
    }

    let record = |n: usize| stats.batch_sizes.lock().unwrap().entry(path.clone()).or_default().push(n);
    let is_post = *req.method() == tiny_http::Method::Post;
    let result: Result<(u16, serde_json::Value), (u16, serde_json::Value)> = (|| {
        if read.is_err() {
            return Err(error(400, "request body is not UTF-8"));
        }
        if path == "/health" {
            return ok(HealthResponse { status: "ok".into() });
        }
        if let Some(tok) = &f.required_token {
            if auth.as_deref() != Some(format!("Bearer {tok}").as_str()) {
                return Err(error(401, "unauthorized"));
            }
        }
        if !is_post {
            return Err(error(405, "method not allowed"));
        }
        if let Some((status, msg)) = &f.fail {
            return Err(error(*status, msg.clone()));
        }
        match path.as_str() {
            "/translate" => {
                let r: TranslateRequest = parse(&body)?;
                record(r.texts.len());
                ok(TranslateResponse { translations: r.texts.iter().map(|t| (h.translate)(t)).collect() })
            }
            "/restore" => {
                let r: TextsBody = parse(&body)?;
                record(r.texts.len());
                ok(TextsBody { texts: r.texts.iter().map(|t| (h.restore)(t)).collect() })
            }
            "/embed" => {
                let r: TextsBody = parse(&body)?;
                record(r.texts.len());
                ok(EmbedResponse { vectors: r.texts.iter().map(|t| (h.embed)(t)).collect() })
            }
            "/score" => {
                let r: ScoreRequest = parse(&body)?;
                if r.sources.len() != r.hypotheses.len() || r.hypotheses.len() != r.references.len() {
                    return Err(error(400, "list lengths differ"));
                }
                record(r.sources.len());
                let scores = (0..r.sources.len())
                    .map(|i| (h.score)(&r.sources[i], &r.hypotheses[i], &r.references[i]))
                    .collect();
                ok(ScoreResponse { scores })
            }
            "/chat" => {
                let r: ChatRequest = parse(&body)?;
                record(1);
                ok(ChatResponse { text: (h.chat)(&r.prompt) })
            }
            _ => Err(error(404, format!("no route {path}"))),
        }
    })();
    let (status, value) = result.unwrap_or_else(|e| e);
    stats.in_flight.fetch_sub(1, Ordering::SeqCst);
    let _ = req.respond(json_response(status, &value));
}
