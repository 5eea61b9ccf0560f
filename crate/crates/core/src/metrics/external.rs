//! Client for an external model-based scorer (BERTScore, AlignScore).

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::gateway::GatewayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scorer {
    Bertscore,
    Alignscore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalScore {
    pub score: f64,
    pub version: String,
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    pred: &'a str,
    #[serde(rename = "ref")]
    reference: &'a str,
    scorer: Scorer,
}

pub struct ScorerClient {
    base_url: String,
    client: reqwest::blocking::Client,
    timeout: Duration,
}

impl ScorerClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            client: reqwest::blocking::Client::new(),
            timeout: Duration::from_secs(120),
        }
    }

    /// POSTs `{pred, ref, scorer}` to `{base}/score`.
    pub fn score(&self, pred: &str, reference: &str, scorer: Scorer) -> Result<ExternalScore, GatewayError> {
        let url = format!("{}/score", self.base_url.trim_end_matches('/'));
        let transport = |e: reqwest::Error| GatewayError::Transport {
            attempts: 1,
            message: e.to_string(),
        };
        let resp = self
            .client
            .post(&url)
            .timeout(self.timeout)
            .json(&ScoreRequest {
                pred,
                reference,
                scorer,
            })
            .send()
            .map_err(transport)?;
        let status = resp.status();
        let body = resp.text().map_err(transport)?;
        if !status.is_success() {
            return Err(GatewayError::Rejected {
                status: status.as_u16(),
                body,
            });
        }
        let parsed: ExternalScore = serde_json::from_str(&body)
            .map_err(|e| GatewayError::ProtocolViolation(format!("bad scorer reply: {e}")))?;
        if !parsed.score.is_finite() {
            return Err(GatewayError::ProtocolViolation(
                "scorer returned a non-finite score".into(),
            ));
        }
        Ok(parsed)
    }
}

/// One-shot form of [`ScorerClient::score`].
pub fn external_score(
    pred: &str,
    reference: &str,
    scorer: Scorer,
    base_url: &str,
) -> Result<ExternalScore, GatewayError> {
    ScorerClient::new(base_url).score(pred, reference, scorer)
}
