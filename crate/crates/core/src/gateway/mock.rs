use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::types::{ChatRequest, ChatResponse, Role, Usage};
use super::{Gateway, GatewayError};

/// Scripted failure a mock reply can stand in for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplyError {
    Transport,
    Protocol,
    ContextOverflow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MockReply {
    Text(String),
    Error { error: ReplyError },
}

impl From<&str> for MockReply {
    fn from(s: &str) -> Self {
        MockReply::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Needles {
    One(String),
    Many(Vec<String>),
}

impl Default for Needles {
    fn default() -> Self {
        Needles::Many(Vec::new())
    }
}

impl Needles {
    fn all_in(&self, haystack: &str) -> bool {
        match self {
            Needles::One(n) => haystack.contains(n.as_str()),
            Needles::Many(ns) => ns.iter().all(|n| haystack.contains(n.as_str())),
        }
    }
}

/// One routing rule: requests for `role` whose text contains every
/// `contains` needle (and whose media URIs contain `media`, if set) are
/// answered from `replies` in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    pub role: Role,
    #[serde(default)]
    contains: Needles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media: Option<String>,
    #[serde(default)]
    pub replies: Vec<MockReply>,
    /// Restart from the first reply instead of running dry.
    #[serde(default)]
    pub cycle: bool,
}

impl MockRule {
    pub fn new(role: Role, replies: impl IntoIterator<Item = impl Into<MockReply>>) -> Self {
        Self {
            role,
            contains: Needles::default(),
            media: None,
            replies: replies.into_iter().map(Into::into).collect(),
            cycle: false,
        }
    }

    pub fn containing(mut self, needle: impl Into<String>) -> Self {
        let needle = needle.into();
        self.contains = match self.contains {
            Needles::One(first) => Needles::Many(vec![first, needle]),
            Needles::Many(mut ns) => {
                ns.push(needle);
                Needles::Many(ns)
            }
        };
        self
    }

    pub fn with_media(mut self, needle: impl Into<String>) -> Self {
        self.media = Some(needle.into());
        self
    }

    pub fn cycling(mut self) -> Self {
        self.cycle = true;
        self
    }

    fn matches(&self, request: &ChatRequest, text: &str) -> bool {
        self.role == request.role
            && self.contains.all_in(text)
            && self
                .media
                .as_ref()
                .is_none_or(|m| request.media.iter().any(|r| r.uri.contains(m.as_str())))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockScript {
    /// Model ids reported per role; defaults to `mock-<role>`.
    #[serde(default)]
    pub models: std::collections::BTreeMap<Role, String>,
    pub rules: Vec<MockRule>,
}

impl MockScript {
    pub fn new(rules: Vec<MockRule>) -> Self {
        Self {
            models: Default::default(),
            rules,
        }
    }

    pub fn load(path: &Path) -> Result<Self, std::io::Error> {
        let raw = std::fs::read_to_string(path)?;
        serde_json::from_str(&raw).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MockCall {
    pub request: ChatRequest,
    pub response: Result<ChatResponse, GatewayError>,
}

struct State {
    cursors: Vec<usize>,
    log: Vec<MockCall>,
}

/// Deterministic gateway answering from a [`MockScript`].
///
/// Rules are tried in script order; the first matching rule with a reply
/// left answers. Every request, valid or not, is appended to the log.
pub struct MockGateway {
    script: MockScript,
    state: Mutex<State>,
}

impl MockGateway {
    pub fn new(script: MockScript) -> Self {
        let cursors = vec![0; script.rules.len()];
        Self {
            script,
            state: Mutex::new(State {
                cursors,
                log: Vec::new(),
            }),
        }
    }

    pub fn script(&self) -> &MockScript {
        &self.script
    }

    pub fn calls(&self) -> Vec<MockCall> {
        self.state.lock().expect("mock state poisoned").log.clone()
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.calls().into_iter().map(|c| c.request).collect()
    }

    pub fn count(&self, role: Role) -> usize {
        let state = self.state.lock().expect("mock state poisoned");
        state.log.iter().filter(|c| c.request.role == role).count()
    }

    fn answer(&self, state: &mut State, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        request.validate()?;
        let text = request.text();
        for (idx, rule) in self.script.rules.iter().enumerate() {
            if rule.replies.is_empty() || !rule.matches(request, &text) {
                continue;
            }
            let cursor = &mut state.cursors[idx];
            if *cursor >= rule.replies.len() {
                if !rule.cycle {
                    continue;
                }
                *cursor = 0;
            }
            let reply = rule.replies[*cursor].clone();
            *cursor += 1;
            return match reply {
                MockReply::Text(text) => Ok(ChatResponse {
                    usage: Usage {
                        prompt_tokens: request.text().split_whitespace().count() as u64,
                        completion_tokens: text.split_whitespace().count() as u64,
                    },
                    text,
                    latency_ms: 0,
                }),
                MockReply::Error { error } => Err(match error {
                    ReplyError::Transport => GatewayError::Transport {
                        attempts: 1,
                        message: "scripted transport failure".into(),
                    },
                    ReplyError::Protocol => GatewayError::ProtocolViolation("scripted protocol failure".into()),
                    ReplyError::ContextOverflow => GatewayError::ContextOverflow("scripted context overflow".into()),
                }),
            };
        }
        Err(GatewayError::ScriptExhausted { role: request.role })
    }
}

impl Gateway for MockGateway {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let mut state = self.state.lock().expect("mock state poisoned");
        let response = self.answer(&mut state, request);
        state.log.push(MockCall {
            request: request.clone(),
            response: response.clone(),
        });
        response
    }

    /// Script consumption order must not depend on thread scheduling.
    fn max_concurrency(&self) -> usize {
        1
    }

    fn model_id(&self, role: Role) -> String {
        self.script
            .models
            .get(&role)
            .cloned()
            .unwrap_or_else(|| format!("mock-{}", role.tag().to_lowercase()))
    }
}
