//! Prompt templates.
//!
//! Defaults are compiled in from the repository's `prompts/` directory.
//! [`PromptSet::load_dir`] overrides any template whose file exists in a
//! given directory.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::text::sha256_hex;

/// Prefix every reprompt must start with.
pub const REPROMPT_PREFIX: &str = "Describe the video in detail and focus on";
/// Reasoner answer meaning the summary needs no follow-up.
pub const SUFFICIENT_SENTINEL: &str = "no new query";
/// Marker the aggregator output must start with.
pub const LEAD_MARKER: &str = "<lead>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptSet {
    /// Generic per-video summarization request.
    pub generic: String,
    /// Reasoner relevance feedback; `{event_name}`, `{summary}`.
    pub reasoner: String,
    /// Aggregator system prompt.
    pub aggregator: String,
    /// Per-sentence claim decomposition; `{paragraph}`, `{sentence}`.
    pub decompose: String,
    /// Grounding judge; `{claim}`, `{evidence}`.
    pub judge: String,
    /// Answer extraction for Arg; `{article}`, `{question}`.
    pub extract: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            generic: include_str!("../../../prompts/generic.txt").trim_end().to_string(),
            reasoner: include_str!("../../../prompts/reasoner.txt").trim_end().to_string(),
            aggregator: include_str!("../../../prompts/aggregator.txt").trim_end().to_string(),
            decompose: include_str!("../../../prompts/decompose.txt").trim_end().to_string(),
            judge: include_str!("../../../prompts/judge.txt").trim_end().to_string(),
            extract: include_str!("../../../prompts/extract.txt").trim_end().to_string(),
        }
    }
}

impl PromptSet {
    pub fn load_dir(dir: &Path) -> std::io::Result<Self> {
        let mut set = Self::default();
        for (name, slot) in set.slots_mut() {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                *slot = std::fs::read_to_string(&path)?.trim_end().to_string();
            }
        }
        Ok(set)
    }

    fn slots_mut(&mut self) -> [(&'static str, &mut String); 6] {
        [
            ("generic", &mut self.generic),
            ("reasoner", &mut self.reasoner),
            ("aggregator", &mut self.aggregator),
            ("decompose", &mut self.decompose),
            ("judge", &mut self.judge),
            ("extract", &mut self.extract),
        ]
    }

    /// SHA-256 of each template, keyed by template name.
    pub fn hashes(&self) -> BTreeMap<String, String> {
        [
            ("generic", &self.generic),
            ("reasoner", &self.reasoner),
            ("aggregator", &self.aggregator),
            ("decompose", &self.decompose),
            ("judge", &self.judge),
            ("extract", &self.extract),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), sha256_hex(v)))
        .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_the_contract_strings() {
        let p = PromptSet::default();
        assert!(p.reasoner.contains("'no new query.'"));
        assert!(p.reasoner.contains(REPROMPT_PREFIX));
        assert!(p.reasoner.contains("{event_name}") && p.reasoner.contains("{summary}"));
        assert!(p.aggregator.contains("You MUST start your output with \"<lead>\""));
        assert!(p.decompose.contains("{paragraph}") && p.decompose.contains("{sentence}"));
        assert!(p.judge.contains("{claim}") && p.judge.contains("{evidence}"));
        assert_eq!(p.generic, "Describe the video in detail.");
    }

    #[test]
    fn directory_overrides_single_template() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("generic.txt"), "Summarize the video.\n").unwrap();
        let p = PromptSet::load_dir(dir.path()).unwrap();
        assert_eq!(p.generic, "Summarize the video.");
        assert_eq!(p.reasoner, PromptSet::default().reasoner);
        assert_ne!(p.hashes()["generic"], PromptSet::default().hashes()["generic"]);
    }
}
