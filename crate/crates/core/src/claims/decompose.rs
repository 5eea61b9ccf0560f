use serde::{Deserialize, Serialize};

use crate::gateway::{ChatRequest, GatewayError, Message, Role};
use crate::parallel::bounded_map;
use crate::prompts::PromptSet;
use crate::text::{render_template, split_sentences};
use crate::Gateway;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub text: String,
    /// Index of the originating sentence in the article body.
    pub source_sentence: usize,
    /// The decomposition reply was unusable; `text` is the whole sentence.
    #[serde(default)]
    pub flagged: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimSet {
    pub event_id: String,
    pub method: String,
    /// Ordered by `source_sentence`.
    pub claims: Vec<Claim>,
}

impl ClaimSet {
    pub fn len(&self) -> usize {
        self.claims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.claims.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.claims.iter().map(|c| c.text.as_str())
    }

    pub fn flagged(&self) -> usize {
        self.claims.iter().filter(|c| c.flagged).count()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ClaimItem {
    Object { claim: String },
    Bare(String),
}

/// Parses a decomposition reply: a JSON array of `{"claim": ...}` objects,
/// possibly surrounded by prose. `None` when no non-empty claim is found.
pub fn parse_claims(reply: &str) -> Option<Vec<String>> {
    let start = reply.find('[')?;
    let end = reply.rfind(']')?;
    if end < start {
        return None;
    }
    let items: Vec<ClaimItem> = serde_json::from_str(&reply[start..=end]).ok()?;
    let claims: Vec<String> = items
        .into_iter()
        .map(|item| match item {
            ClaimItem::Object { claim } | ClaimItem::Bare(claim) => claim.trim().to_string(),
        })
        .filter(|c| !c.is_empty())
        .collect();
    (!claims.is_empty()).then_some(claims)
}

const DECOMPOSE_ATTEMPTS: usize = 2;

fn decompose_sentence(
    paragraph: &str,
    index: usize,
    sentence: &str,
    gw: &dyn Gateway,
    prompts: &PromptSet,
) -> Result<Vec<Claim>, GatewayError> {
    let prompt = render_template(&prompts.decompose, &[("paragraph", paragraph), ("sentence", sentence)]);
    let request = ChatRequest::new(Role::Extractor, vec![Message::user(prompt)]);
    for attempt in 1..=DECOMPOSE_ATTEMPTS {
        let reply = gw.complete(&request)?.text;
        if let Some(claims) = parse_claims(&reply) {
            return Ok(claims
                .into_iter()
                .map(|text| Claim {
                    text,
                    source_sentence: index,
                    flagged: false,
                })
                .collect());
        }
        log::warn!("decomposition reply {attempt}/{DECOMPOSE_ATTEMPTS} for sentence {index} is unusable: {reply:?}");
    }
    Ok(vec![Claim {
        text: sentence.to_string(),
        source_sentence: index,
        flagged: true,
    }])
}

/// Decomposes every sentence of `body`, with the whole body as context.
/// Every sentence contributes at least one claim.
pub fn decompose(
    event_id: &str,
    method: &str,
    body: &str,
    gw: &dyn Gateway,
    prompts: &PromptSet,
) -> Result<ClaimSet, GatewayError> {
    let sentences = split_sentences(body);
    let per_sentence = bounded_map(&sentences, gw.max_concurrency(), |i, s| {
        decompose_sentence(body, i, s, gw, prompts)
    });
    let mut claims = Vec::new();
    for result in per_sentence {
        claims.extend(result?);
    }
    Ok(ClaimSet {
        event_id: event_id.to_string(),
        method: method.to_string(),
        claims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_claim_objects_in_order() {
        let claims = parse_claims(r#"[{"claim":"A fire broke out"},{"claim":"The fire was in Paris"}]"#).unwrap();
        assert_eq!(claims, vec!["A fire broke out", "The fire was in Paris"]);
    }

    #[test]
    fn tolerates_prose_and_fences() {
        let reply = "Here you go:\n```json\n[{\"claim\": \"X happened\"}]\n```";
        assert_eq!(parse_claims(reply).unwrap(), vec!["X happened"]);
    }

    #[test]
    fn rejects_refusals_and_empty_arrays() {
        assert_eq!(parse_claims("sorry, I cannot"), None);
        assert_eq!(parse_claims("[]"), None);
        assert_eq!(parse_claims(r#"[{"claim": "  "}]"#), None);
        assert_eq!(parse_claims(r#"[{"fact": "x"}]"#), None);
    }
}
