use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::wire::*;
use super::{BackendError, ChatModel, Embedder, EndpointConfig, LanguageTag, PairScorer, TextRestorer, Translator};

const EXCERPT_CHARS: usize = 200;

/// Client for one backend service speaking the JSON protocol.
///
/// Immutable after construction; share it freely across threads.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    config: EndpointConfig,
    client: reqwest::blocking::Client,
}

enum Attempt {
    Transport(String),
    Fatal(BackendError),
}

fn excerpt(body: &str) -> String {
    let mut s: String = body.chars().take(EXCERPT_CHARS).collect();
    if body.chars().count() > EXCERPT_CHARS {
        s.push('…');
    }
    s
}

impl HttpBackend {
    pub fn new(config: EndpointConfig) -> Result<Self, BackendError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(Self { config, client })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn url(&self, route: &str) -> String {
        format!("{}/{}", self.config.base_url.trim_end_matches('/'), route.trim_start_matches('/'))
    }

    fn bearer(&self) -> Result<Option<String>, BackendError> {
        match &self.config.auth_token_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| BackendError::Config(format!("environment variable {var} is not set"))),
        }
    }

    fn attempt(&self, builder: reqwest::blocking::RequestBuilder) -> Result<String, Attempt> {
        let resp = builder.send().map_err(|e| Attempt::Transport(e.without_url().to_string()))?;
        let status = resp.status();
        let body = resp.text().map_err(|e| Attempt::Transport(e.without_url().to_string()))?;
        if !status.is_success() {
            let message = serde_json::from_str::<ErrorBody>(&body).map(|b| b.error).unwrap_or_else(|_| excerpt(&body));
            return Err(Attempt::Fatal(BackendError::Http { status: status.as_u16(), message }));
        }
        Ok(body)
    }

    fn call<Req: Serialize, Resp: DeserializeOwned>(&self, route: &str, body: Option<&Req>) -> Result<Resp, BackendError> {
        let url = self.url(route);
        let token = self.bearer()?;
        let attempts = 1 + self.config.max_retries;
        let mut last = String::new();
        for attempt in 1..=attempts {
            log::debug!("{} {url} (attempt {attempt}/{attempts})", if body.is_some() { "POST" } else { "GET" });
            let mut req = match body {
                Some(b) => self.client.post(&url).json(b),
                None => self.client.get(&url),
            };
            if let Some(t) = &token {
                req = req.bearer_auth(t);
            }
            match self.attempt(req) {
                Ok(text) => {
                    return serde_json::from_str(&text)
                        .map_err(|e| BackendError::Protocol(format!("{route}: bad response body ({e}): {}", excerpt(&text))));
                }
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Transport(msg)) => {
                    log::warn!("{url}: transport failure on attempt {attempt}/{attempts}: {msg}");
                    last = msg;
                    if attempt < attempts {
                        let backoff = self.config.retry_backoff_secs * f64::powi(2.0, attempt as i32 - 1);
                        thread::sleep(Duration::from_secs_f64(backoff));
                    }
                }
            }
        }
        Err(BackendError::Unavailable { attempts, last })
    }

    pub fn health(&self) -> Result<(), BackendError> {
        let h: HealthResponse = self.call::<(), _>("/health", None)?;
        if h.status == "ok" {
            Ok(())
        } else {
            Err(BackendError::Protocol(format!("health status {:?}", h.status)))
        }
    }
}

type Slot<T> = Option<Result<Vec<T>, BackendError>>;

/// Splits `items` into `batch_size` chunks, runs `f` on up to `max_parallel`
/// chunks at once, and reassembles the results in input order.
pub(crate) fn run_batched<I, T, F>(items: &[I], batch_size: usize, max_parallel: usize, f: F) -> Result<Vec<T>, BackendError>
where
    I: Sync,
    T: Send,
    F: Fn(&[I]) -> Result<Vec<T>, BackendError> + Sync,
{
    let chunks: Vec<&[I]> = items.chunks(batch_size.max(1)).collect();
    let slots: Mutex<Vec<Slot<T>>> =
        Mutex::new(std::iter::repeat_with(|| None).take(chunks.len()).collect());
    let next = AtomicUsize::new(0);
    let workers = max_parallel.max(1).min(chunks.len());
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(chunk) = chunks.get(i) else { break };
        let res = f(chunk).and_then(|out| {
            if out.len() == chunk.len() {
                Ok(out)
            } else {
                Err(BackendError::Protocol(format!("batch of {} items returned {} results", chunk.len(), out.len())))
            }
        });
        let failed = res.is_err();
        slots.lock().unwrap()[i] = Some(res);
        if failed {
            // stop handing out new chunks
            next.store(chunks.len(), Ordering::SeqCst);
        }
    };
    if workers <= 1 {
        work();
    } else {
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }
    let mut out = Vec::with_capacity(items.len());
    for slot in slots.into_inner().unwrap() {
        match slot {
            Some(Ok(v)) => out.extend(v),
            Some(Err(e)) => return Err(e),
            None => {}
        }
    }
    Ok(out)
}

fn require_non_empty(texts: &[String], what: &str) -> Result<(), BackendError> {
    if texts.is_empty() {
        return Err(BackendError::Precondition(format!("{what}: no inputs")));
    }
    Ok(())
}

impl Translator for HttpBackend {
    fn translate_batch(&self, sources: &[String], src: &LanguageTag, tgt: &LanguageTag) -> Result<Vec<String>, BackendError> {
        require_non_empty(sources, "translate")?;
        run_batched(sources, self.config.batch_size, self.config.max_parallel, |chunk| {
            let req = TranslateRequest {
                source_lang: src.as_str().to_string(),
                target_lang: tgt.as_str().to_string(),
                texts: chunk.to_vec(),
            };
            let resp: TranslateResponse = self.call("/translate", Some(&req))?;
            Ok(resp.translations)
        })
    }
}

impl TextRestorer for HttpBackend {
    fn restore_via_backend(&self, texts: &[String]) -> Result<Vec<String>, BackendError> {
        require_non_empty(texts, "restore")?;
        if let Some(i) = texts.iter().position(|t| t.trim().is_empty()) {
            return Err(BackendError::Precondition(format!("restore: text {i} is empty")));
        }
        run_batched(texts, self.config.batch_size, self.config.max_parallel, |chunk| {
            let resp: TextsBody = self.call("/restore", Some(&TextsBody { texts: chunk.to_vec() }))?;
            Ok(resp.texts)
        })
    }
}

impl Embedder for HttpBackend {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        require_non_empty(texts, "embed")?;
        let vectors = run_batched(texts, self.config.batch_size, self.config.max_parallel, |chunk| {
            let resp: EmbedResponse = self.call("/embed", Some(&TextsBody { texts: chunk.to_vec() }))?;
            Ok(resp.vectors)
        })?;
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(BackendError::Protocol("embedding vectors are empty".into()));
        }
        if let Some(i) = vectors.iter().position(|v| v.len() != dim) {
            return Err(BackendError::Protocol(format!(
                "embedding {i} has dimension {}, expected {dim}",
                vectors[i].len()
            )));
        }
        Ok(vectors)
    }
}

impl PairScorer for HttpBackend {
    fn score_pairs(&self, sources: &[String], hypotheses: &[String], references: &[String]) -> Result<Vec<f64>, BackendError> {
        if sources.len() != hypotheses.len() || hypotheses.len() != references.len() {
            return Err(BackendError::Precondition(format!(
                "score: list lengths differ ({}, {}, {})",
                sources.len(),
                hypotheses.len(),
                references.len()
            )));
        }
        require_non_empty(sources, "score")?;
        let idx: Vec<usize> = (0..sources.len()).collect();
        run_batched(&idx, self.config.batch_size, self.config.max_parallel, |chunk| {
            let pick = |v: &[String]| chunk.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
            let req = ScoreRequest { sources: pick(sources), hypotheses: pick(hypotheses), references: pick(references) };
            let resp: ScoreResponse = self.call("/score", Some(&req))?;
            Ok(resp.scores)
        })
    }
}

impl ChatModel for HttpBackend {
    fn chat_complete(&self, prompt: &str) -> Result<String, BackendError> {
        if prompt.is_empty() {
            return Err(BackendError::Precondition("chat: empty prompt".into()));
        }
        let resp: ChatResponse = self.call("/chat", Some(&ChatRequest { prompt: prompt.to_string() }))?;
        Ok(resp.text)
    }
}
