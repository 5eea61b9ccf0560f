use std::collections::BTreeMap;

use super::cite::cite_sentences;
use super::{Article, Engine, EngineError, Method, RunConfig, Stage, SummaryTrace};
use crate::corpus::EventTopic;
use crate::gateway::{ChatRequest, Message, Role};
use crate::prompts::LEAD_MARKER;

/// Text after the first `<lead>` marker, up to an optional `</lead>`.
/// `None` when the marker is missing or nothing follows it.
pub fn extract_lead(output: &str) -> Option<String> {
    let start = output.find(LEAD_MARKER)? + LEAD_MARKER.len();
    let rest = &output[start..];
    let rest = rest.split("</lead>").next().unwrap_or(rest);
    let body = rest.replace(LEAD_MARKER, "");
    let body = body.trim();
    (!body.is_empty()).then(|| body.to_string())
}

/// The aggregator's user message: per video, the generic summary, every
/// (re-prompt, summary) pair, then the transcript when one is given.
pub fn aggregator_input(event_name: &str, traces: &[SummaryTrace], transcripts: &BTreeMap<String, String>) -> String {
    let mut out = format!("Event: {event_name}\n");
    for (i, trace) in traces.iter().enumerate() {
        out.push_str(&format!("\nSummary {}:\n{}\n", i + 1, trace.generic_summary.trim()));
        for round in &trace.rounds {
            out.push_str(&format!(
                "\nFollow-up request: {}\nFollow-up summary:\n{}\n",
                round.reprompt.trim(),
                round.summary.trim()
            ));
        }
        if let Some(transcript) = transcripts.get(&trace.video_id) {
            out.push_str(&format!("\nAudio transcript:\n{}\n", transcript.trim()));
        }
    }
    out
}

const LEAD_ATTEMPTS: usize = 2;

impl Engine<'_> {
    /// Writes the lead section from `traces`. `transcripts` keys must be
    /// trace video ids. Retries once when the `<lead>` marker is missing.
    pub fn synthesize_article(
        &self,
        traces: &[SummaryTrace],
        transcripts: &BTreeMap<String, String>,
        event: &EventTopic,
    ) -> Result<Article, EngineError> {
        if traces.is_empty() {
            return Err(EngineError::NoVideos);
        }
        if let Some(stray) = transcripts.keys().find(|k| !traces.iter().any(|t| &t.video_id == *k)) {
            return Err(EngineError::TranscriptWithoutTrace(stray.clone()));
        }
        let started_at = self.clock.now();
        let mut request = ChatRequest::new(
            Role::Aggregator,
            vec![
                Message::system(self.prompts.aggregator.clone()),
                Message::user(aggregator_input(&event.name, traces, transcripts)),
            ],
        );
        request.decoding = self.decoding;

        let mut body = None;
        for attempt in 1..=LEAD_ATTEMPTS {
            let reply = self.gw.complete(&request).map_err(|source| EngineError::Gateway {
                stage: Stage::Aggregation,
                video_id: None,
                round: None,
                source,
            })?;
            body = extract_lead(&reply.text);
            if body.is_some() {
                break;
            }
            log::warn!(
                "aggregator reply {attempt}/{LEAD_ATTEMPTS} for {} lacks {LEAD_MARKER}",
                event.id
            );
        }
        let body = body.ok_or(EngineError::MissingLeadMarker {
            attempts: LEAD_ATTEMPTS,
        })?;

        let rounds = traces.iter().map(|t| t.rounds.len()).max().unwrap_or(0) as u32;
        let mut config = RunConfig::new(if rounds == 0 { Method::Cag0 } else { Method::CagR }, rounds);
        config.include_transcripts = !transcripts.is_empty();
        let citations = cite_sentences(&body, traces);
        let video_ids = traces.iter().map(|t| t.video_id.clone()).collect();
        let mut provenance = self.provenance(config, video_ids, started_at);
        provenance.ungrounded_sentences = citations.iter().filter(|c| c.ungrounded).map(|c| c.index).collect();
        Ok(Article {
            event_id: event.id.clone(),
            body,
            citations,
            provenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lead_marker_is_stripped() {
        assert_eq!(
            extract_lead("<lead> A fire broke out."),
            Some("A fire broke out.".into())
        );
        assert_eq!(
            extract_lead("thinking...\n<lead>\nA fire.\n</lead>\ntrailing"),
            Some("A fire.".into())
        );
        assert_eq!(extract_lead("A fire broke out."), None);
        assert_eq!(extract_lead("<lead>   "), None);
    }
}
