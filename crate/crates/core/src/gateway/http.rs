use std::collections::BTreeMap;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::types::{ChatRequest, ChatResponse, Role, Speaker, Usage};
use super::{Gateway, GatewayError};

pub const DEFAULT_CONCURRENCY: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Base URL; `/chat/completions` is appended.
    pub base_url: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
}

fn default_timeout_ms() -> u64 {
    300_000
}

fn default_concurrency() -> usize {
    DEFAULT_CONCURRENCY
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            timeout_ms: default_timeout_ms(),
            concurrency: DEFAULT_CONCURRENCY,
        }
    }

    /// Reads `CAG_GATEWAY_<ROLE>_URL`, `_MODEL` and `_KEY`. Returns `None`
    /// when the URL variable is unset.
    pub fn from_env(role: Role) -> Option<Self> {
        let var = |suffix: &str| std::env::var(format!("CAG_GATEWAY_{}_{suffix}", role.tag())).ok();
        let url = var("URL")?;
        let mut cfg = Self::new(url, var("MODEL").unwrap_or_default());
        cfg.api_key = var("KEY").filter(|k| !k.is_empty());
        Some(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Retries after the first attempt, for transient failures only.
    pub max_retries: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay_ms: 500,
        }
    }
}

impl RetryPolicy {
    fn delay(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.base_delay_ms.saturating_mul(1u64 << attempt.min(16)))
    }
}

struct Semaphore {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Self {
            free: Mutex::new(permits.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("semaphore poisoned");
        while *free == 0 {
            free = self.cv.wait(free).expect("semaphore poisoned");
        }
        *free -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("semaphore poisoned") += 1;
        self.0.cv.notify_one();
    }
}

struct Endpoint {
    config: EndpointConfig,
    gate: Semaphore,
}

/// Chat-completion client over blocking HTTP, one endpoint per role.
pub struct HttpGateway {
    client: reqwest::blocking::Client,
    endpoints: BTreeMap<Role, Endpoint>,
    retry: RetryPolicy,
}

enum Failure {
    Transient(String),
    Fatal(GatewayError),
}

impl HttpGateway {
    pub fn new(endpoints: BTreeMap<Role, EndpointConfig>, retry: RetryPolicy) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| GatewayError::Transport {
                attempts: 0,
                message: e.to_string(),
            })?;
        let endpoints = endpoints
            .into_iter()
            .map(|(role, config)| {
                let gate = Semaphore::new(config.concurrency);
                (role, Endpoint { config, gate })
            })
            .collect();
        Ok(Self {
            client,
            endpoints,
            retry,
        })
    }

    /// Builds a gateway from `CAG_GATEWAY_*` variables for every role that
    /// has a URL set.
    pub fn from_env(retry: RetryPolicy) -> Result<Self, GatewayError> {
        let endpoints = Role::ALL
            .iter()
            .filter_map(|&role| EndpointConfig::from_env(role).map(|c| (role, c)))
            .collect();
        Self::new(endpoints, retry)
    }

    pub fn has_role(&self, role: Role) -> bool {
        self.endpoints.contains_key(&role)
    }

    fn attempt(&self, endpoint: &EndpointConfig, body: &Value) -> Result<(Value, u64), Failure> {
        let url = format!("{}/chat/completions", endpoint.base_url.trim_end_matches('/'));
        let mut req = self
            .client
            .post(&url)
            .timeout(Duration::from_millis(endpoint.timeout_ms))
            .json(body);
        if let Some(key) = &endpoint.api_key {
            req = req.bearer_auth(key);
        }
        let started = Instant::now();
        let resp = req.send().map_err(|e| Failure::Transient(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Failure::Transient(e.to_string()))?;
        let latency = started.elapsed().as_millis() as u64;

        if status.is_success() {
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| Failure::Fatal(GatewayError::ProtocolViolation(format!("response is not JSON: {e}"))))?;
            if value.get("error").is_some() && value.get("choices").is_none() {
                return Err(classify_error_body(status.as_u16(), &text));
            }
            return Ok((value, latency));
        }
        let code = status.as_u16();
        if code == 429 || status.is_server_error() {
            return Err(Failure::Transient(format!("status {code}: {}", truncate(&text, 200))));
        }
        Err(classify_error_body(code, &text))
    }
}

fn classify_error_body(status: u16, body: &str) -> Failure {
    if signals_context_overflow(body) {
        Failure::Fatal(GatewayError::ContextOverflow(truncate(body, 500)))
    } else {
        Failure::Fatal(GatewayError::Rejected {
            status,
            body: truncate(body, 500),
        })
    }
}

fn signals_context_overflow(body: &str) -> bool {
    let lower = body.to_lowercase();
    [
        "context_length_exceeded",
        "maximum context length",
        "context length",
        "too many tokens",
    ]
    .iter()
    .any(|needle| lower.contains(needle))
}

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((idx, _)) => format!("{}...", &s[..idx]),
        None => s.to_string(),
    }
}

/// The JSON body sent for `request` to a server hosting `model`.
pub(crate) fn request_body(request: &ChatRequest, model: &str) -> Value {
    let last_user = request.messages.iter().rposition(|m| m.speaker == Speaker::User);
    let messages: Vec<Value> = request
        .messages
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let role = match m.speaker {
                Speaker::System => "system",
                Speaker::User => "user",
                Speaker::Assistant => "assistant",
            };
            if Some(i) == last_user && !request.media.is_empty() {
                let mut parts = vec![json!({"type": "text", "text": m.content})];
                for media in &request.media {
                    let mut part = json!({
                        "type": "video_url",
                        "url": media.uri,
                        "video_url": {"url": media.uri},
                    });
                    if let Some(fps) = media.fps {
                        part["fps"] = json!(fps);
                    }
                    parts.push(part);
                }
                json!({"role": role, "content": parts})
            } else {
                json!({"role": role, "content": m.content})
            }
        })
        .collect();
    let mut body = json!({
        "model": model,
        "messages": messages,
        "temperature": request.decoding.temperature,
        "max_tokens": request.decoding.max_tokens,
    });
    if let Some(seed) = request.decoding.seed {
        body["seed"] = json!(seed);
    }
    body
}

/// Pulls the first choice's message content and usage out of a response.
pub(crate) fn parse_response(value: &Value, latency_ms: u64) -> Result<ChatResponse, GatewayError> {
    let message = value
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .ok_or_else(|| GatewayError::ProtocolViolation("missing choices[0].message".into()))?;
    let text = match message.get("content") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Array(parts)) => parts
            .iter()
            .filter_map(|p| p.get("text").and_then(Value::as_str))
            .collect::<Vec<_>>()
            .join(""),
        Some(other) => {
            return Err(GatewayError::ProtocolViolation(format!(
                "unexpected content type: {other}"
            )))
        }
    };
    if text.is_empty() {
        log::warn!("endpoint returned empty content");
    }
    let usage = value.get("usage");
    let count = |key: &str| usage.and_then(|u| u.get(key)).and_then(Value::as_u64).unwrap_or(0);
    Ok(ChatResponse {
        text,
        usage: Usage {
            prompt_tokens: count("prompt_tokens"),
            completion_tokens: count("completion_tokens"),
        },
        latency_ms,
    })
}

impl Gateway for HttpGateway {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        request.validate()?;
        let endpoint = self
            .endpoints
            .get(&request.role)
            .ok_or(GatewayError::NotConfigured(request.role))?;
        let body = request_body(request, &endpoint.config.model);
        let _permit = endpoint.gate.acquire();

        let mut attempt = 0u32;
        loop {
            match self.attempt(&endpoint.config, &body) {
                Ok((value, latency)) => return parse_response(&value, latency),
                Err(Failure::Fatal(err)) => return Err(err),
                Err(Failure::Transient(message)) => {
                    if attempt >= self.retry.max_retries {
                        return Err(GatewayError::Transport {
                            attempts: attempt + 1,
                            message,
                        });
                    }
                    log::warn!(
                        "{} request failed (attempt {}): {message}; retrying",
                        request.role,
                        attempt + 1
                    );
                    std::thread::sleep(self.retry.delay(attempt));
                    attempt += 1;
                }
            }
        }
    }

    fn max_concurrency(&self) -> usize {
        self.endpoints
            .values()
            .map(|e| e.config.concurrency.max(1))
            .max()
            .unwrap_or(1)
    }

    fn model_id(&self, role: Role) -> String {
        self.endpoints
            .get(&role)
            .map(|e| e.config.model.clone())
            .unwrap_or_default()
    }
}
