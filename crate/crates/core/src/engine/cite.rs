use serde::{Deserialize, Serialize};

use super::SummaryTrace;
use crate::metrics::{rouge_n_tokens, TokenSeq};
use crate::text::split_sentences;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceCitation {
    pub index: usize,
    pub sentence: String,
    pub videos: Vec<String>,
    /// No trace shares a single token with the sentence.
    pub ungrounded: bool,
}

/// Attributes each sentence of `body` to the video whose summaries best
/// cover it (ROUGE-1 recall of the sentence). Ties go to the
/// lexicographically smallest video id.
pub fn cite_sentences(body: &str, traces: &[SummaryTrace]) -> Vec<SentenceCitation> {
    let mut sources: Vec<(&str, TokenSeq)> = traces
        .iter()
        .map(|t| {
            (
                t.video_id.as_str(),
                TokenSeq::new(&t.summaries().collect::<Vec<_>>().join("\n")),
            )
        })
        .collect();
    sources.sort_by(|a, b| a.0.cmp(b.0));

    split_sentences(body)
        .into_iter()
        .enumerate()
        .map(|(index, sentence)| {
            let tokens = TokenSeq::new(&sentence);
            let mut best: Option<(&str, f64)> = None;
            for (video, text) in &sources {
                let recall = rouge_n_tokens(text, &tokens, 1).recall;
                if recall > 0.0 && best.is_none_or(|(_, r)| recall > r) {
                    best = Some((video, recall));
                }
            }
            SentenceCitation {
                index,
                sentence,
                videos: best.iter().map(|(v, _)| v.to_string()).collect(),
                ungrounded: best.is_none(),
            }
        })
        .collect()
}
