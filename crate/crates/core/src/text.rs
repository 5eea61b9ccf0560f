//! Small text helpers shared by the engine and the claim pipeline.

use sha2::{Digest, Sha256};

/// Splits `body` into sentences.
///
/// A sentence ends at `.`, `!` or `?` when the next character is whitespace
/// (or the end of the text). Terminal punctuation stays with its sentence;
/// surrounding whitespace is trimmed and empty pieces are dropped.
pub fn split_sentences(body: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = body.char_indices().peekable();
    while let Some((idx, ch)) = chars.next() {
        if matches!(ch, '.' | '!' | '?') {
            let at_boundary = match chars.peek() {
                None => true,
                Some((_, next)) => next.is_whitespace(),
            };
            if at_boundary {
                let end = idx + ch.len_utf8();
                push_trimmed(&mut sentences, &body[start..end]);
                start = end;
            }
        }
    }
    push_trimmed(&mut sentences, &body[start..]);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}

/// Substitutes `{name}` placeholders in a single left-to-right pass.
///
/// Values are never rescanned, so a summary that happens to contain
/// `{event_name}` is inserted literally. Unknown `{...}` sequences (for
/// instance the JSON braces of few-shot examples) are copied through.
pub fn render_template(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        let hit = vars.iter().find_map(|(name, value)| {
            let key_len = name.len() + 2;
            (tail.len() >= key_len && tail.as_bytes()[key_len - 1] == b'}' && &tail[1..key_len - 1] == *name)
                .then_some((key_len, *value))
        });
        match hit {
            Some((len, value)) => {
                out.push_str(value);
                rest = &tail[len..];
            }
            None => {
                out.push('{');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Hex-encoded SHA-256 of `text`.
pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}
