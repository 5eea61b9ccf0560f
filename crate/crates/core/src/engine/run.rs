use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::cite::cite_sentences;
use super::{Article, Engine, EngineError, Method, RunConfig, SummaryTrace};
use crate::corpus::{EventTopic, VideoRecord};
use crate::parallel::bounded_map;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub article: Article,
    pub traces: Vec<SummaryTrace>,
}

impl Engine<'_> {
    /// Runs one generation method over `videos`, in the order given.
    pub fn run_method(
        &self,
        config: &RunConfig,
        event: &EventTopic,
        videos: &[&VideoRecord],
    ) -> Result<RunOutput, EngineError> {
        config.validate()?;
        if videos.is_empty() {
            return Err(EngineError::NoVideos);
        }
        let started_at = self.clock.now();
        let budget = match config.method {
            Method::Concat0 | Method::Cag0 => 0,
            Method::ConcatRePrompt | Method::CagR => config.budget_r,
        };

        let cap = self.gw.max_concurrency();
        let traces = bounded_map(videos, cap, |_, video| self.reprompt_loop(video, &event.name, budget))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;

        let mut article = match config.method {
            Method::Concat0 => {
                let parts: Vec<&str> = traces.iter().map(|t| t.generic_summary.as_str()).collect();
                self.concat_article(config, event, &traces, &parts, started_at)?
            }
            Method::ConcatRePrompt => {
                let parts: Vec<&str> = traces
                    .iter()
                    .flat_map(|t| t.rounds.iter().map(|r| r.summary.as_str()))
                    .collect();
                if parts.is_empty() {
                    return Err(EngineError::EmptyOutput(
                        "no video produced a re-prompted summary".into(),
                    ));
                }
                self.concat_article(config, event, &traces, &parts, started_at)?
            }
            Method::Cag0 | Method::CagR => {
                let transcripts: BTreeMap<String, String> = if config.include_transcripts {
                    videos
                        .iter()
                        .filter_map(|v| v.transcript.as_ref().map(|t| (v.id.clone(), t.clone())))
                        .collect()
                } else {
                    BTreeMap::new()
                };
                let mut article = self.synthesize_article(&traces, &transcripts, event)?;
                article.provenance.config = *config;
                article.provenance.started_at = started_at;
                article
            }
        };

        let inputs: HashSet<&str> = videos.iter().map(|v| v.id.as_str()).collect();
        for citation in &article.citations {
            if let Some(v) = citation.videos.iter().find(|v| !inputs.contains(v.as_str())) {
                return Err(EngineError::CitationOutsideInput(v.clone()));
            }
        }
        article.provenance.finished_at = self.clock.now();
        Ok(RunOutput { article, traces })
    }

    fn concat_article(
        &self,
        config: &RunConfig,
        event: &EventTopic,
        traces: &[SummaryTrace],
        parts: &[&str],
        started_at: String,
    ) -> Result<Article, EngineError> {
        let body = parts.join("\n\n");
        if body.trim().is_empty() {
            return Err(EngineError::EmptyOutput("all concatenated summaries are empty".into()));
        }
        let citations = cite_sentences(&body, traces);
        let video_ids = traces.iter().map(|t| t.video_id.clone()).collect();
        let mut provenance = self.provenance(*config, video_ids, started_at);
        provenance.ungrounded_sentences = citations.iter().filter(|c| c.ungrounded).map(|c| c.index).collect();
        Ok(Article {
            event_id: event.id.clone(),
            body,
            citations,
            provenance,
        })
    }
}
