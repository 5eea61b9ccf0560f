//! Parsing of reasoner relevance feedback.

use serde::{Deserialize, Serialize};

use crate::prompts::{REPROMPT_PREFIX, SUFFICIENT_SENTINEL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feedback {
    /// The summary covers the event; stop re-prompting this video.
    Sufficient,
    /// Ask the summarizer again with this prompt. Always starts with
    /// [`REPROMPT_PREFIX`].
    RePrompt(String),
}

/// The reply did not contain the sentinel or a prefixed query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unparseable {
    pub reply: String,
}

/// Drops a reasoning chain: text before the last `</think>`, then
/// everything but the last blank-line separated block.
pub fn final_answer_block(reply: &str) -> &str {
    let tail = match reply.rfind("</think>") {
        Some(pos) => &reply[pos + "</think>".len()..],
        None => reply,
    };
    let mut last = "";
    let mut block_start: Option<usize> = None;
    let mut offset = 0;
    for line in tail.split_inclusive('\n') {
        if line.trim().is_empty() {
            if let Some(start) = block_start.take() {
                last = &tail[start..offset];
            }
        } else if block_start.is_none() {
            block_start = Some(offset);
        }
        offset += line.len();
    }
    if let Some(start) = block_start {
        last = &tail[start..];
    }
    last.trim()
}

fn strip_decoration(line: &str) -> &str {
    line.trim()
        .trim_matches(|c: char| matches!(c, '"' | '\'' | '`' | '*' | '\u{201c}' | '\u{201d}'))
        .trim()
}

fn is_sentinel(line: &str) -> bool {
    let cleaned = strip_decoration(line).trim_end_matches(|c: char| matches!(c, '.' | '!') || c.is_whitespace());
    let cleaned = strip_decoration(cleaned);
    cleaned.eq_ignore_ascii_case(SUFFICIENT_SENTINEL)
}

fn as_reprompt(line: &str) -> Option<String> {
    let cleaned = strip_decoration(line);
    let head = cleaned.get(..REPROMPT_PREFIX.len())?;
    head.eq_ignore_ascii_case(REPROMPT_PREFIX)
        .then(|| format!("{REPROMPT_PREFIX}{}", &cleaned[REPROMPT_PREFIX.len()..]))
}

/// Classifies a reasoner reply.
pub fn parse_feedback(reply: &str) -> Result<Feedback, Unparseable> {
    let block = final_answer_block(reply);
    if is_sentinel(block) {
        return Ok(Feedback::Sufficient);
    }
    for line in block.lines().filter(|l| !l.trim().is_empty()) {
        if is_sentinel(line) {
            return Ok(Feedback::Sufficient);
        }
        if let Some(query) = as_reprompt(line) {
            return Ok(Feedback::RePrompt(query));
        }
    }
    Err(Unparseable {
        reply: reply.to_string(),
    })
}
