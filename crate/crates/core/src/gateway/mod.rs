//! One wire contract for every model role.
//!
//! The engine only sees the [`Gateway`] trait. [`HttpGateway`] speaks the
//! chat-completion JSON shape to configured endpoints; [`MockGateway`]
//! answers from a script and keeps an ordered request log.

mod http;
mod mock;
mod types;

use thiserror::Error;

pub use http::{EndpointConfig, HttpGateway, RetryPolicy};
pub use mock::{MockGateway, MockReply, MockRule, MockScript, ReplyError};
pub use types::{ChatRequest, ChatResponse, Decoding, MediaRef, Message, Role, Speaker, Usage};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no endpoint configured for role {0}")]
    NotConfigured(Role),
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("context overflow: {0}")]
    ContextOverflow(String),
    #[error("endpoint rejected request with status {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("mock script exhausted for {role} request")]
    ScriptExhausted { role: Role },
}

/// Anything that can answer a [`ChatRequest`].
pub trait Gateway: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError>;

    /// How many requests the caller may keep in flight at once.
    fn max_concurrency(&self) -> usize {
        1
    }

    /// Model identifier serving `role`, recorded in run provenance.
    fn model_id(&self, role: Role) -> String;
}

impl<G: Gateway + ?Sized> Gateway for &G {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        (**self).complete(request)
    }

    fn max_concurrency(&self) -> usize {
        (**self).max_concurrency()
    }

    fn model_id(&self, role: Role) -> String {
        (**self).model_id(role)
    }
}

impl<G: Gateway + ?Sized> Gateway for std::sync::Arc<G> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        (**self).complete(request)
    }

    fn max_concurrency(&self) -> usize {
        (**self).max_concurrency()
    }

    fn model_id(&self, role: Role) -> String {
        (**self).model_id(role)
    }
}

/// Convenience: send and return just the text.
pub fn complete_text(gw: &dyn Gateway, request: &ChatRequest) -> Result<String, GatewayError> {
    gw.complete(request).map(|r| r.text)
}
