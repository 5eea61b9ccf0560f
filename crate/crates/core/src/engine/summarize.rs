use super::feedback::{parse_feedback, Feedback};
use super::{Engine, EngineError, RepromptRound, Stage, SummaryTrace, Termination};
use crate::corpus::VideoRecord;
use crate::gateway::{ChatRequest, MediaRef, Message, Role};
use crate::text::render_template;

impl Engine<'_> {
    fn ask_summarizer(
        &self,
        video: &VideoRecord,
        prompt: &str,
        stage: Stage,
        round: Option<usize>,
    ) -> Result<String, EngineError> {
        let mut request = ChatRequest::new(Role::VideoSummarizer, vec![Message::user(prompt)]).with_media(MediaRef {
            uri: video.uri.clone(),
            fps: self.fps,
        });
        request.decoding = self.decoding;
        self.gw
            .complete(&request)
            .map(|r| r.text)
            .map_err(|source| EngineError::Gateway {
                stage,
                video_id: Some(video.id.clone()),
                round,
                source,
            })
    }

    /// The summarizer's answer to the fixed generic prompt, verbatim.
    pub fn generic_summarize(&self, video: &VideoRecord) -> Result<String, EngineError> {
        self.ask_summarizer(video, &self.prompts.generic, Stage::GenericSummary, None)
    }

    /// One reasoner call on `summary`. Gateway errors carry no video id;
    /// [`Engine::reprompt_loop`] adds it.
    pub fn relevance_feedback(&self, event_name: &str, summary: &str) -> Result<Feedback, EngineError> {
        if summary.trim().is_empty() {
            return Err(EngineError::EmptySummary);
        }
        let prompt = render_template(
            &self.prompts.reasoner,
            &[("event_name", event_name), ("summary", summary)],
        );
        let mut request = ChatRequest::new(Role::Reasoner, vec![Message::user(prompt)]);
        request.decoding = self.decoding;
        let reply = self
            .gw
            .complete(&request)
            .map_err(|source| EngineError::Gateway {
                stage: Stage::Feedback,
                video_id: None,
                round: None,
                source,
            })?
            .text;
        parse_feedback(&reply).map_err(|u| EngineError::UnparseableFeedback { reply: u.reply })
    }

    /// Generic summary, then up to `budget` rounds of feedback and
    /// re-prompting. A reply that follows neither format ends the loop as
    /// if the summary were sufficient, with a warning.
    pub fn reprompt_loop(
        &self,
        video: &VideoRecord,
        event_name: &str,
        budget: u32,
    ) -> Result<SummaryTrace, EngineError> {
        let generic_summary = self.generic_summarize(video)?;
        let mut trace = SummaryTrace {
            video_id: video.id.clone(),
            generic_summary,
            rounds: Vec::new(),
            terminated_by: Termination::BudgetExhausted,
            reasoner_calls: 0,
            audit: Vec::new(),
        };

        for round in 0..budget as usize {
            let latest = trace
                .rounds
                .last()
                .map_or(trace.generic_summary.as_str(), |r| r.summary.as_str());
            if latest.trim().is_empty() {
                let note = format!("round {round}: summary is empty, stopping re-prompting");
                log::warn!("video {}: {note}", video.id);
                trace.audit.push(note);
                break;
            }
            trace.reasoner_calls += 1;
            let feedback = match self.relevance_feedback(event_name, latest) {
                Ok(f) => f,
                Err(EngineError::UnparseableFeedback { reply }) => {
                    let note = format!("round {round}: unparseable reasoner reply treated as sufficient: {reply:?}");
                    log::warn!("video {}: {note}", video.id);
                    trace.audit.push(note);
                    Feedback::Sufficient
                }
                Err(EngineError::Gateway { stage, source, .. }) => {
                    return Err(EngineError::Gateway {
                        stage,
                        video_id: Some(video.id.clone()),
                        round: Some(round),
                        source,
                    })
                }
                Err(other) => return Err(other),
            };
            match feedback {
                Feedback::Sufficient => {
                    trace.terminated_by = Termination::Sufficient;
                    break;
                }
                Feedback::RePrompt(reprompt) => {
                    let summary = self.ask_summarizer(video, &reprompt, Stage::Reprompt, Some(round))?;
                    trace.rounds.push(RepromptRound { reprompt, summary });
                }
            }
        }
        Ok(trace)
    }
}
