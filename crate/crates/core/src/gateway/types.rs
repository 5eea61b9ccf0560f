use std::fmt;

use serde::{Deserialize, Serialize};

use super::GatewayError;

/// The model role a request is addressed to. Each role resolves to its own
/// endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    VideoSummarizer,
    Reasoner,
    Aggregator,
    Extractor,
    Judge,
    ExternalScorer,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::VideoSummarizer,
        Role::Reasoner,
        Role::Aggregator,
        Role::Extractor,
        Role::Judge,
        Role::ExternalScorer,
    ];

    /// Upper-case tag used in env var names and scripts.
    pub fn tag(self) -> &'static str {
        match self {
            Role::VideoSummarizer => "VIDEO_SUMMARIZER",
            Role::Reasoner => "REASONER",
            Role::Aggregator => "AGGREGATOR",
            Role::Extractor => "EXTRACTOR",
            Role::Judge => "JUDGE",
            Role::ExternalScorer => "EXTERNAL_SCORER",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub speaker: Speaker,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            speaker: Speaker::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            speaker: Speaker::User,
            content: content.into(),
        }
    }
}

/// A video handed to the serving layer by URI; frame sampling happens there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaRef {
    pub uri: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for Decoding {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            max_tokens: 2048,
            seed: Some(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub role: Role,
    pub messages: Vec<Message>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub media: Vec<MediaRef>,
    pub decoding: Decoding,
}

impl ChatRequest {
    pub fn new(role: Role, messages: Vec<Message>) -> Self {
        Self {
            role,
            messages,
            media: Vec::new(),
            decoding: Decoding::default(),
        }
    }

    pub fn with_media(mut self, media: MediaRef) -> Self {
        self.media.push(media);
        self
    }

    /// Checks the request invariants. Called before any transport work.
    pub fn validate(&self) -> Result<(), GatewayError> {
        let invalid = |reason: &str| Err(GatewayError::InvalidRequest(reason.to_string()));
        match self.messages.last() {
            None => return invalid("messages must not be empty"),
            Some(m) if m.speaker != Speaker::User => return invalid("the last message must come from the user"),
            _ => {}
        }
        if !self.media.is_empty() && self.role != Role::VideoSummarizer {
            return Err(GatewayError::InvalidRequest(format!(
                "media is only allowed for {}, got {}",
                Role::VideoSummarizer,
                self.role
            )));
        }
        if let Some(bad) = self
            .media
            .iter()
            .find(|m| m.fps.is_some_and(|f| f.is_nan() || f <= 0.0))
        {
            return Err(GatewayError::InvalidRequest(format!(
                "fps hint for {} must be positive",
                bad.uri
            )));
        }
        if self.decoding.temperature.is_nan() || self.decoding.temperature < 0.0 {
            return invalid("temperature must be non-negative");
        }
        if self.decoding.max_tokens == 0 {
            return invalid("max_tokens must be positive");
        }
        Ok(())
    }

    /// All message text joined with newlines; what mock matchers inspect.
    pub fn text(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    /// May be empty only when the endpoint itself returned empty content.
    pub text: String,
    pub usage: Usage,
    pub latency_ms: u64,
}
